//! The exceptional Jordan algebra of 3x3 Hermitian octonion matrices.
//!
//! `[a, b, c; x, y, z]` stands for
//!
//! ```text
//!     ( a     z     conj(y) )
//!     ( z̄     b     x       )
//!     ( y     x̄     c       )
//! ```
//!
//! All structure maps are generic over the scalar ring, so the same code
//! serves integral enumeration (doubled `i64` coordinates), exact rational and
//! quadratic-field work, and formal-parameter expansions through [`Jet`].

mod jet;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

pub use jet::Jet;

use crate::arith::{parse_rational, rational_to_string, QuadExt};
use crate::octonion::Octonion;
use crate::scalar::{FieldScalar, Scalar};
use crate::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlbertElement<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub x: Octonion<S>,
    pub y: Octonion<S>,
    pub z: Octonion<S>,
}

impl<S: fmt::Debug> fmt::Debug for AlbertElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}, {:?}; {:?}, {:?}, {:?}]", self.a, self.b, self.c, self.x, self.y, self.z)
    }
}

impl<S: Scalar> AlbertElement<S> {
    pub fn new(a: S, b: S, c: S, x: Octonion<S>, y: Octonion<S>, z: Octonion<S>) -> Self {
        AlbertElement { a, b, c, x, y, z }
    }

    pub fn zero() -> Self {
        Self::diag(S::zero(), S::zero(), S::zero())
    }

    pub fn diag(a: S, b: S, c: S) -> Self {
        AlbertElement { a, b, c, x: Octonion::zero(), y: Octonion::zero(), z: Octonion::zero() }
    }

    pub fn identity() -> Self {
        Self::diag(S::one(), S::one(), S::one())
    }

    /// `E_1`, `E_2`, `E_3` for `i = 1, 2, 3`.
    pub fn e(i: usize) -> Self {
        let (o, z) = (S::one(), S::zero());
        match i {
            1 => Self::diag(o, z.clone(), z),
            2 => Self::diag(z.clone(), o, z),
            3 => Self::diag(z.clone(), z, o),
            _ => panic!("E_i needs i in 1..=3, got {i}"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    pub fn scale(&self, s: &S) -> Self {
        AlbertElement {
            a: self.a.clone() * s.clone(),
            b: self.b.clone() * s.clone(),
            c: self.c.clone() * s.clone(),
            x: self.x.scale(s),
            y: self.y.scale(s),
            z: self.z.scale(s),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AlbertElement<T> {
        AlbertElement { a: f(&self.a), b: f(&self.b), c: f(&self.c), x: self.x.map(&f), y: self.y.map(&f), z: self.z.map(&f) }
    }

    /// The adjoint `A^#`, a quadratic map.
    pub fn adjoint(&self) -> Self {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let (x, y, z) = (&self.x, &self.y, &self.z);
        AlbertElement {
            a: b.clone() * c.clone() - x.norm(),
            b: c.clone() * a.clone() - y.norm(),
            c: a.clone() * b.clone() - z.norm(),
            x: &y.mul(z).conj() - &x.scale(a),
            y: &z.mul(x).conj() - &y.scale(b),
            z: &x.mul(y).conj() - &z.scale(c),
        }
    }

    /// `abc + Tr(xyz) - aN(x) - bN(y) - cN(z)`.
    pub fn det(&self) -> S {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        a.clone() * b.clone() * c.clone() + self.x.mul(&self.y).mul(&self.z).trace()
            - a.clone() * self.x.norm()
            - b.clone() * self.y.norm()
            - c.clone() * self.z.norm()
    }

    /// `(A, B) = aa' + bb' + cc' + <x,x'> + <y,y'> + <z,z'>`.
    pub fn form(&self, other: &Self) -> S {
        self.a.clone() * other.a.clone()
            + self.b.clone() * other.b.clone()
            + self.c.clone() * other.c.clone()
            + self.x.inner(&other.x)
            + self.y.inner(&other.y)
            + self.z.inner(&other.z)
    }

    /// `Tr(A) = (A, I)`.
    pub fn trace(&self) -> S {
        self.a.clone() + self.b.clone() + self.c.clone()
    }

    /// `A x B = (A + B)^# - A^# - B^#`.
    pub fn cross(&self, other: &Self) -> Self {
        &(&(self + other).adjoint() - &self.adjoint()) - &other.adjoint()
    }

    /// Rank 0..=3 from the adjoint and the determinant.
    pub fn rank(&self) -> u8 {
        if self.is_zero() {
            0
        } else if self.adjoint().is_zero() {
            1
        } else if self.det().is_zero() {
            2
        } else {
            3
        }
    }

    /// The 27 reference coordinates `(a, b, c, x_0..x_7, y_0..y_7, z_0..z_7)`.
    pub fn to_coords(&self) -> Vec<S> {
        let mut v = Vec::with_capacity(27);
        v.extend([self.a.clone(), self.b.clone(), self.c.clone()]);
        v.extend(self.x.coords.iter().cloned());
        v.extend(self.y.coords.iter().cloned());
        v.extend(self.z.coords.iter().cloned());
        v
    }

    pub fn from_coords(v: &[S]) -> Self {
        assert_eq!(v.len(), 27);
        let oct = |o: usize| Octonion::new(std::array::from_fn(|i| v[o + i].clone()));
        AlbertElement { a: v[0].clone(), b: v[1].clone(), c: v[2].clone(), x: oct(3), y: oct(11), z: oct(19) }
    }

    /// The `i`-th reference basis vector, `0 <= i < 27`.
    pub fn basis(i: usize) -> Self {
        let mut v = vec![S::zero(); 27];
        v[i] = S::one();
        Self::from_coords(&v)
    }

    /// The matrix `[[a, z, ȳ], [z̄, b, x], [y, x̄, c]]`.
    pub fn to_matrix(&self) -> [[Octonion<S>; 3]; 3] {
        [
            [Octonion::scalar(self.a.clone()), self.z.clone(), self.y.conj()],
            [self.z.conj(), Octonion::scalar(self.b.clone()), self.x.clone()],
            [self.y.clone(), self.x.conj(), Octonion::scalar(self.c.clone())],
        ]
    }
}

impl<S: Scalar + PartialOrd> AlbertElement<S> {
    /// All seven principal minors nonnegative.
    pub fn is_psd(&self) -> bool {
        let zero = S::zero();
        let (a, b, c) = (&self.a, &self.b, &self.c);
        [
            a.clone(),
            b.clone(),
            c.clone(),
            b.clone() * c.clone() - self.x.norm(),
            c.clone() * a.clone() - self.y.norm(),
            a.clone() * b.clone() - self.z.norm(),
            self.det(),
        ]
        .iter()
        .all(|m| *m >= zero)
    }
}

impl<S: FieldScalar> AlbertElement<S> {
    /// `A ∘ B = (AB + BA) / 2` with matrix products over the octonions.
    pub fn jordan_product(&self, other: &Self) -> Self {
        let ma = self.to_matrix();
        let mb = other.to_matrix();
        let prod = |p: &[[Octonion<S>; 3]; 3], q: &[[Octonion<S>; 3]; 3], i: usize, j: usize| {
            (0..3).fold(Octonion::zero(), |acc, k| &acc + &p[i][k].mul(&q[k][j]))
        };
        let sym = |i: usize, j: usize| {
            let s = &prod(&ma, &mb, i, j) + &prod(&mb, &ma, i, j);
            s.map(|v| v.clone().half())
        };
        let (d0, d1, d2) = (sym(0, 0), sym(1, 1), sym(2, 2));
        AlbertElement {
            a: d0.coords[0].clone(),
            b: d1.coords[0].clone(),
            c: d2.coords[0].clone(),
            x: sym(1, 2),
            y: sym(2, 0),
            z: sym(0, 1),
        }
    }
}

/// `(D1, D2)`: the coefficients of `s` and of `st` in `det(P + sA + tB)`.
pub fn det_polarize<S: Scalar>(a: &AlbertElement<S>, b: &AlbertElement<S>, p: &AlbertElement<S>) -> (S, S) {
    let lift = p.map(|v| Jet::<S, 1>::constant(v.clone()));
    let sa = a.map(|v| Jet::<S, 1>::s(v.clone()));
    let tb = b.map(|v| Jet::<S, 1>::t(v.clone()));
    let d = (&(&lift + &sa) + &tb).det();
    (d.coeff(1, 0), d.coeff(1, 1))
}

/// Coefficients of `det(A + tB)` as a cubic in `t`.
pub fn det_line<S: Scalar>(a: &AlbertElement<S>, b: &AlbertElement<S>) -> [S; 4] {
    let lift = a.map(|v| Jet::<S, 3>::constant(v.clone()));
    let tb = b.map(|v| Jet::<S, 3>::t(v.clone()));
    let d = (&lift + &tb).det();
    std::array::from_fn(|j| d.coeff(0, j))
}

impl<S: Scalar> Add for &AlbertElement<S> {
    type Output = AlbertElement<S>;
    fn add(self, o: Self) -> AlbertElement<S> {
        AlbertElement {
            a: self.a.clone() + o.a.clone(),
            b: self.b.clone() + o.b.clone(),
            c: self.c.clone() + o.c.clone(),
            x: &self.x + &o.x,
            y: &self.y + &o.y,
            z: &self.z + &o.z,
        }
    }
}

impl<S: Scalar> Sub for &AlbertElement<S> {
    type Output = AlbertElement<S>;
    fn sub(self, o: Self) -> AlbertElement<S> {
        AlbertElement {
            a: self.a.clone() - o.a.clone(),
            b: self.b.clone() - o.b.clone(),
            c: self.c.clone() - o.c.clone(),
            x: &self.x - &o.x,
            y: &self.y - &o.y,
            z: &self.z - &o.z,
        }
    }
}

impl<S: Scalar> Neg for &AlbertElement<S> {
    type Output = AlbertElement<S>;
    fn neg(self) -> AlbertElement<S> {
        AlbertElement { a: -self.a.clone(), b: -self.b.clone(), c: -self.c.clone(), x: -&self.x, y: -&self.y, z: -&self.z }
    }
}

/// Convenience wrapper bundling the pairing, trace, and cross product.
pub fn bilinear_trace_cross<S: Scalar>(a: &AlbertElement<S>, b: &AlbertElement<S>) -> (S, S, AlbertElement<S>) {
    (a.form(b), a.trace(), a.cross(b))
}

/// JSON encoding of scalars inside Albert elements.
pub trait JsonScalar: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, String>;
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(rational_to_string(self))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        let s = v.as_str().ok_or("expected a \"num/den\" string")?;
        parse_rational(s).map_err(|e| e.to_string())
    }
}

impl JsonScalar for QuadExt {
    fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("QuadExt serializes")
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        serde_json::from_value(v.clone()).map_err(|e| e.to_string())
    }
}

impl<S: Scalar + JsonScalar> Serialize for AlbertElement<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        let oct = |o: &Octonion<S>| Value::Array(o.coords.iter().map(JsonScalar::to_json).collect());
        json!({
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "c": self.c.to_json(),
            "x": oct(&self.x),
            "y": oct(&self.y),
            "z": oct(&self.z),
        })
        .serialize(s)
    }
}

impl<'de, S: Scalar + JsonScalar> Deserialize<'de> for AlbertElement<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let scalar = |k: &str| S::from_json(v.get(k).ok_or_else(|| D::Error::custom(format!("missing {k}")))?).map_err(D::Error::custom);
        let oct = |k: &str| -> Result<Octonion<S>, D::Error> {
            let arr = v.get(k).and_then(Value::as_array).ok_or_else(|| D::Error::custom(format!("missing {k}")))?;
            if arr.len() != 8 {
                return Err(D::Error::custom("octonion needs 8 coordinates"));
            }
            let mut out = Octonion::zero();
            for (o, item) in out.coords.iter_mut().zip(arr) {
                *o = S::from_json(item).map_err(D::Error::custom)?;
            }
            Ok(out)
        };
        Ok(AlbertElement { a: scalar("a")?, b: scalar("b")?, c: scalar("c")?, x: oct("x")?, y: oct("y")?, z: oct("z")? })
    }
}

#[cfg(test)]
mod tests;
