//! Octonions over an arbitrary scalar ring, Coxeter's integral order, and
//! its norm shells.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{rat, rational_to_string};
use crate::linalg::{det_integer, hermite_normal_form, IntegralSolver};
use crate::scalar::Scalar;
use crate::shortvec::short_vectors;
use crate::Rational;

/// Oriented Fano lines: on each `(i, j, k)`, `e_i e_j = e_k` cyclically.
pub const FANO_LINES: [(usize, usize, usize); 7] =
    [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)];

/// `PRODUCT[i][j] = (sign, k)` with `e_i e_j = sign * e_k`.
static PRODUCT: OnceLock<[[(i8, u8); 8]; 8]> = OnceLock::new();

fn product_table() -> &'static [[(i8, u8); 8]; 8] {
    PRODUCT.get_or_init(|| {
        let mut t = [[(0i8, 0u8); 8]; 8];
        for i in 0..8 {
            t[0][i] = (1, i as u8);
            t[i][0] = (1, i as u8);
        }
        for i in 1..8 {
            t[i][i] = (-1, 0);
        }
        for &(i, j, k) in &FANO_LINES {
            for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                t[a][b] = (1, c as u8);
                t[b][a] = (-1, c as u8);
            }
        }
        t
    })
}

/// `x = sum x_i e_i` with `e_0 = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Octonion<S> {
    pub coords: [S; 8],
}

impl<S: fmt::Debug> fmt::Debug for Octonion<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter()).finish()
    }
}

impl<S: Scalar> Octonion<S> {
    pub fn new(coords: [S; 8]) -> Self {
        Octonion { coords }
    }

    pub fn zero() -> Self {
        Octonion { coords: std::array::from_fn(|_| S::zero()) }
    }

    pub fn one() -> Self {
        Self::unit(0)
    }

    /// The basis vector `e_i`.
    pub fn unit(i: usize) -> Self {
        let mut x = Self::zero();
        x.coords[i] = S::one();
        x
    }

    pub fn scalar(s: S) -> Self {
        let mut x = Self::zero();
        x.coords[0] = s;
        x
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn conj(&self) -> Self {
        let mut c = self.coords.clone();
        for v in c.iter_mut().skip(1) {
            *v = -v.clone();
        }
        Octonion { coords: c }
    }

    /// `Tr(x) = 2 x_0`.
    pub fn trace(&self) -> S {
        self.coords[0].clone() + self.coords[0].clone()
    }

    /// `N(x) = sum x_i^2`.
    pub fn norm(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone())
    }

    /// `<x, y> = Tr(x conj(y)) = 2 sum x_i y_i`.
    pub fn inner(&self, other: &Self) -> S {
        let s = self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        s.clone() + s
    }

    pub fn scale(&self, s: &S) -> Self {
        Octonion { coords: std::array::from_fn(|i| self.coords[i].clone() * s.clone()) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = product_table();
        let mut out: [S; 8] = std::array::from_fn(|_| S::zero());
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let (sign, k) = t[i][j];
                let p = a.clone() * b.clone();
                let k = k as usize;
                out[k] = if sign > 0 { out[k].clone() + p } else { out[k].clone() - p };
            }
        }
        Octonion { coords: out }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Octonion<T> {
        Octonion { coords: std::array::from_fn(|i| f(&self.coords[i])) }
    }
}

impl<S: Scalar> Add for &Octonion<S> {
    type Output = Octonion<S>;
    fn add(self, rhs: Self) -> Octonion<S> {
        Octonion { coords: std::array::from_fn(|i| self.coords[i].clone() + rhs.coords[i].clone()) }
    }
}

impl<S: Scalar> Sub for &Octonion<S> {
    type Output = Octonion<S>;
    fn sub(self, rhs: Self) -> Octonion<S> {
        Octonion { coords: std::array::from_fn(|i| self.coords[i].clone() - rhs.coords[i].clone()) }
    }
}

impl<S: Scalar> Neg for &Octonion<S> {
    type Output = Octonion<S>;
    fn neg(self) -> Octonion<S> {
        Octonion { coords: std::array::from_fn(|i| -self.coords[i].clone()) }
    }
}

impl<S: Scalar> Mul for &Octonion<S> {
    type Output = Octonion<S>;
    fn mul(self, rhs: Self) -> Octonion<S> {
        Octonion::mul(self, rhs)
    }
}

/// Returns `(conj(x), Tr(x), N(x))`.
pub fn oct_conj_trace_norm<S: Scalar>(x: &Octonion<S>) -> (Octonion<S>, S, S) {
    (x.conj(), x.trace(), x.norm())
}

impl Octonion<Rational> {
    /// Builds `x` from the doubled coordinates `2x`.
    pub fn from_doubled(v: &[i64; 8]) -> Self {
        Octonion { coords: std::array::from_fn(|i| rat(v[i], 2)) }
    }

    /// `2x` as integers, if integral.
    pub fn to_doubled(&self) -> Option<[i64; 8]> {
        let mut out = [0i64; 8];
        for (o, c) in out.iter_mut().zip(&self.coords) {
            let t = c * Rational::from_integer(2.into());
            if !t.is_integer() {
                return None;
            }
            *o = i64::try_from(t.to_integer()).ok()?;
        }
        Some(out)
    }
}

impl Serialize for Octonion<Rational> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.collect_seq(self.coords.iter().map(rational_to_string))
    }
}

impl<'de> Deserialize<'de> for Octonion<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        if v.len() != 8 {
            return Err(serde::de::Error::custom("octonion needs 8 coordinates"));
        }
        let mut out = Octonion::<Rational>::zero();
        for (o, s) in out.coords.iter_mut().zip(&v) {
            *o = crate::arith::parse_rational(s).map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}

/// Product of two octonions given by doubled coordinates, returned doubled:
/// `2(xy) = (2x)(2y) / 2`. `None` if the result is not half-integral.
pub fn mul_doubled(x: &[i64; 8], y: &[i64; 8]) -> Option<[i64; 8]> {
    let p = mul_int(x, y);
    let mut out = [0i64; 8];
    for (o, v) in out.iter_mut().zip(p) {
        if v % 2 != 0 {
            return None;
        }
        *o = v / 2;
    }
    Some(out)
}

pub fn conj_doubled(x: &[i64; 8]) -> [i64; 8] {
    let mut c = *x;
    for v in c.iter_mut().skip(1) {
        *v = -*v;
    }
    c
}

/// `N(x)` from doubled coordinates; `None` unless integral.
pub fn norm_doubled(x: &[i64; 8]) -> Option<i64> {
    let s: i64 = x.iter().map(|v| v * v).sum();
    (s % 4 == 0).then_some(s / 4)
}

/// The twelve generators `1, e_1..e_7, h_1..h_4` in doubled coordinates.
pub fn coxeter_generators() -> Vec<[i64; 8]> {
    let mut g = Vec::with_capacity(12);
    for i in 0..8 {
        let mut v = [0i64; 8];
        v[i] = 2;
        g.push(v);
    }
    for support in [[0, 1, 2, 4], [0, 1, 3, 7], [0, 1, 5, 6], [1, 2, 3, 5]] {
        let mut v = [0i64; 8];
        for i in support {
            v[i] = 1;
        }
        g.push(v);
    }
    g
}

/// Coxeter's integral order as a lattice in doubled coordinates.
pub struct CoxeterOrder {
    /// Rows are `2b_i` for the order basis `b_0..b_7`.
    pub basis: [[i64; 8]; 8],
    /// `<b_i, b_j>`.
    pub gram: [[i64; 8]; 8],
    solver: IntegralSolver,
    /// Residues mod 2 of doubled elements, as bit masks. The order contains
    /// `Z^8`, so membership of an integral doubled vector is a residue test.
    residues: [bool; 256],
}

static COXETER: OnceLock<CoxeterOrder> = OnceLock::new();

impl CoxeterOrder {
    pub fn get() -> &'static CoxeterOrder {
        COXETER.get_or_init(Self::build)
    }

    fn build() -> Self {
        let gens: Vec<Vec<i64>> = coxeter_generators().iter().map(|g| g.to_vec()).collect();
        let h = hermite_normal_form(&gens);
        assert_eq!(h.len(), 8, "Coxeter generators must span rank 8");
        let basis: [[i64; 8]; 8] = std::array::from_fn(|i| std::array::from_fn(|j| h[i][j]));
        // <x, y> = 2 sum x_i y_i, and with doubled rows that is (sum X_i Y_i) / 2.
        let gram = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let s: i64 = (0..8).map(|k| basis[i][k] * basis[j][k]).sum();
                assert!(s % 2 == 0);
                s / 2
            })
        });
        let solver = IntegralSolver::new(&h);
        let mut residues = [false; 256];
        for m in 0..256u32 {
            let mut v = [0i64; 8];
            for (i, row) in basis.iter().enumerate() {
                if m >> i & 1 == 1 {
                    for k in 0..8 {
                        v[k] += row[k];
                    }
                }
            }
            residues[residue_mask(&v)] = true;
        }
        CoxeterOrder { basis, gram, solver, residues }
    }

    pub fn gram_rows(&self) -> Vec<Vec<i64>> {
        self.gram.iter().map(|r| r.to_vec()).collect()
    }

    pub fn gram_det(&self) -> i64 {
        det_integer(&self.gram_rows()).try_into().expect("small determinant")
    }

    /// Basis coordinates of the octonion with doubled coordinates `v`.
    pub fn coords_of_doubled(&self, v: &[i64; 8]) -> Option<[i64; 8]> {
        let c = self.solver.solve(v)?;
        Some(std::array::from_fn(|i| c[i]))
    }

    /// Doubled coordinates of `sum c_i b_i`.
    pub fn doubled_from_coords(&self, c: &[i64]) -> [i64; 8] {
        let mut out = [0i64; 8];
        for (ci, row) in c.iter().zip(&self.basis) {
            if *ci != 0 {
                for k in 0..8 {
                    out[k] += ci * row[k];
                }
            }
        }
        out
    }

    pub fn contains_doubled(&self, v: &[i64; 8]) -> bool {
        self.residues[residue_mask(v)]
    }

    pub fn basis_elements(&self) -> Vec<Octonion<Rational>> {
        self.basis.iter().map(Octonion::from_doubled).collect()
    }
}

fn residue_mask(v: &[i64; 8]) -> usize {
    v.iter().enumerate().fold(0, |m, (i, x)| m | (((x & 1) as usize) << i))
}

/// Raw product of integer coordinate vectors, no rescaling.
#[inline]
pub fn mul_int(x: &[i64; 8], y: &[i64; 8]) -> [i64; 8] {
    let t = product_table();
    let mut out = [0i64; 8];
    for i in 0..8 {
        let a = x[i];
        if a == 0 {
            continue;
        }
        let row = &t[i];
        for j in 0..8 {
            let (sign, k) = row[j];
            out[k as usize] += sign as i64 * a * y[j];
        }
    }
    out
}

/// Membership in Coxeter's integral order.
pub fn order_contains(x: &Octonion<Rational>) -> bool {
    match x.to_doubled() {
        Some(v) => CoxeterOrder::get().contains_doubled(&v),
        None => false,
    }
}

/// Elements of norm `m` in the order, as sorted doubled coordinates.
pub fn norm_shell_doubled(m: u64) -> Vec<[i64; 8]> {
    if m == 0 {
        return vec![[0; 8]];
    }
    let order = CoxeterOrder::get();
    let mut out: Vec<[i64; 8]> = if m <= 4 {
        box_search(m)
    } else {
        let coords = short_vectors(&order.gram_rows(), 2 * m as i64, &[]).expect("Coxeter Gram is definite");
        coords.par_iter().map(|c| order.doubled_from_coords(c)).collect()
    };
    out.sort_unstable();
    out
}

/// Direct sweep over doubled coordinates with `|2x_i| <= 2 sqrt(m)`.
fn box_search(m: u64) -> Vec<[i64; 8]> {
    let target = 4 * m as i64;
    let bound = (2.0 * (m as f64).sqrt()).floor() as i64;
    let order = CoxeterOrder::get();
    let mut out = Vec::new();
    let mut v = [0i64; 8];
    fn rec(i: usize, rem: i64, bound: i64, v: &mut [i64; 8], order: &CoxeterOrder, out: &mut Vec<[i64; 8]>) {
        if i == 8 {
            if rem == 0 && order.contains_doubled(v) {
                out.push(*v);
            }
            return;
        }
        for x in -bound..=bound {
            let sq = x * x;
            if sq > rem {
                continue;
            }
            v[i] = x;
            rec(i + 1, rem - sq, bound, v, order, out);
        }
        v[i] = 0;
    }
    rec(0, target, bound, &mut v, order, &mut out);
    out
}

/// Elements of the order with `N(x) = m`, in lexicographic order of doubled coordinates.
pub fn norm_shell(m: u64) -> Vec<Octonion<Rational>> {
    norm_shell_doubled(m).iter().map(Octonion::from_doubled).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;

    type Q = Octonion<Rational>;

    fn h(i: usize) -> Q {
        Q::from_doubled(&coxeter_generators()[8 + i - 1])
    }

    #[test]
    fn identity_and_units() {
        let x = Q::new(std::array::from_fn(|i| rat(i as i64 - 3, 2)));
        assert_eq!(Q::one().mul(&x), x);
        assert_eq!(x.mul(&Q::one()), x);
        assert_eq!(Q::unit(1).mul(&Q::unit(1)), Q::scalar(rat_int(-1)));
        assert_eq!(Q::unit(1).mul(&Q::unit(2)), Q::unit(4));
        assert_eq!(Q::unit(2).mul(&Q::unit(1)), -&Q::unit(4));
    }

    #[test]
    fn conj_trace_norm() {
        let (c, t, n) = oct_conj_trace_norm(&Q::unit(3));
        assert_eq!(c, -&Q::unit(3));
        assert_eq!(t, rat_int(0));
        assert_eq!(n, rat_int(1));
        assert_eq!(Q::one().trace(), rat_int(2));
        assert_eq!(h(1).norm(), rat_int(1));
        let x = h(4);
        let (c, t, n) = oct_conj_trace_norm(&x);
        assert_eq!(&x + &c, Q::scalar(t));
        assert_eq!(x.mul(&c), Q::scalar(n));
    }

    #[test]
    fn membership() {
        assert!(order_contains(&h(4)));
        assert!(order_contains(&Q::unit(5)));
        let half = Q::new(std::array::from_fn(|i| if i < 2 { rat(1, 2) } else { rat_int(0) }));
        assert!(!order_contains(&half));
        assert!(!order_contains(&Q::scalar(rat(1, 3))));
    }

    #[test]
    fn residue_test_matches_solver() {
        let o = CoxeterOrder::get();
        for m in 0..6561u32 {
            let mut r = m;
            let v: [i64; 8] = std::array::from_fn(|_| {
                let d = (r % 3) as i64 - 1;
                r /= 3;
                d
            });
            assert_eq!(o.contains_doubled(&v), o.coords_of_doubled(&v).is_some(), "{v:?}");
        }
    }

    #[test]
    fn coxeter_lattice_is_even_unimodular() {
        let o = CoxeterOrder::get();
        assert_eq!(o.gram_det(), 1);
        for i in 0..8 {
            assert_eq!(o.gram[i][i] % 2, 0);
            for j in 0..8 {
                assert_eq!(o.gram[i][j], o.gram[j][i]);
            }
        }
        for g in coxeter_generators() {
            assert!(o.contains_doubled(&g));
        }
    }

    #[test]
    fn order_is_closed_under_products() {
        let o = CoxeterOrder::get();
        for x in &o.basis {
            for y in &o.basis {
                let p = mul_doubled(x, y).expect("half-integral product");
                assert!(o.contains_doubled(&p), "{x:?} * {y:?}");
            }
        }
    }

    #[test]
    fn small_shells() {
        assert_eq!(norm_shell(0), vec![Q::zero()]);
        assert_eq!(norm_shell(1).len(), 240);
        assert_eq!(norm_shell(2).len(), 2160);
        // Box sweep and Gram-based search agree where both apply.
        let order = CoxeterOrder::get();
        for m in [1u64, 3] {
            let mut fp: Vec<[i64; 8]> = short_vectors(&order.gram_rows(), 2 * m as i64, &[])
                .unwrap()
                .iter()
                .map(|c| order.doubled_from_coords(c))
                .collect();
            fp.sort_unstable();
            assert_eq!(fp, norm_shell_doubled(m));
        }
    }

    #[test]
    fn shells_are_sorted_and_have_the_right_norm() {
        let s = norm_shell_doubled(5);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(s.iter().all(|v| norm_doubled(v) == Some(5)));
    }

    #[test]
    fn float_octonions_compose() {
        let x = Octonion::<f64>::new([0.5, -1.25, 2.0, 0.0, 3.5, -0.75, 1.0, 0.25]);
        let y = Octonion::<f64>::new([1.5, 0.5, -2.0, 1.0, 0.0, 0.75, -1.0, 2.25]);
        let lhs = x.mul(&y).norm();
        let rhs = x.norm() * y.norm();
        assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }
}
