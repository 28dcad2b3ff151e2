//! Exact scalars: rationals and the quadratic fields `Q(sqrt d)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Rational;

/// Builds a rational from an integer pair. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Renders a rational as `"num/den"`, always with an explicit denominator.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Serde adapter storing a [`Rational`] as a `"num/den"` string.
pub mod ratstr {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as a list of `"num/den"` strings.
pub mod ratstr_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rational_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Splits a nonzero integer as `n = s^2 * f` with `f` squarefree (sign kept on `f`).
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero(), "squarefree part of zero");
    let mut rest = n.abs();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= &p;
        }
        if e % 2 == 1 {
            free *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    free *= rest;
    if n.is_negative() {
        free = -free;
    }
    (square, free)
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let (s, _) = squarefree_decompose(&BigInt::from(d));
    s.is_one()
}

/// An element `base + surd * sqrt(d)` of the quadratic field `Q(sqrt d)`.
///
/// The field is part of the value. Values built from plain rationals (including
/// `zero()` and `one()`) carry no field and combine with any `d`; two values
/// carrying different fields never combine. The checked methods report a
/// mismatch as an error, the operator impls panic on it.
#[derive(Clone, Debug)]
pub struct QuadExt {
    base: Rational,
    surd: Rational,
    d: Option<i64>,
}

/// Which operation [`quad_arith`] performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadOp {
    Add,
    Mul,
    Div,
}

pub fn quad_arith(lhs: &QuadExt, rhs: &QuadExt, kind: QuadOp) -> Result<QuadExt> {
    match kind {
        QuadOp::Add => lhs.try_add(rhs),
        QuadOp::Mul => lhs.try_mul(rhs),
        QuadOp::Div => lhs.try_div(rhs),
    }
}

fn join_fields(a: Option<i64>, b: Option<i64>) -> Result<Option<i64>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::FieldMismatch(x, y)),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

impl QuadExt {
    pub fn new(base: Rational, surd: Rational, d: i64) -> Result<Self> {
        if d == 1 || !is_squarefree(d) {
            return Err(Error::BadField(d));
        }
        Ok(QuadExt { base, surd, d: Some(d) })
    }

    /// `sqrt(d)` itself.
    pub fn sqrt(d: i64) -> Result<Self> {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    /// A rational number with no field attached.
    pub fn rational(r: Rational) -> Self {
        QuadExt { base: r, surd: Rational::zero(), d: None }
    }

    /// A rational number placed in `Q(sqrt d)`.
    pub fn rational_in(r: Rational, d: i64) -> Result<Self> {
        Self::new(r, Rational::zero(), d)
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn surd(&self) -> &Rational {
        &self.surd
    }

    pub fn field(&self) -> Option<i64> {
        self.d
    }

    /// Pins a field-less value to `Q(sqrt d)`; a value that already has a
    /// different field is rejected.
    pub fn in_field(self, d: i64) -> Result<Self> {
        let d = join_fields(self.d, Some(d))?.expect("joined field");
        Self::new(self.base, self.surd, d)
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt { base: self.base.clone(), surd: -self.surd.clone(), d: self.d }
    }

    /// `base^2 - d * surd^2`.
    pub fn norm(&self) -> Rational {
        let d = rat_int(self.d.unwrap_or(0));
        &self.base * &self.base - d * &self.surd * &self.surd
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        Ok(QuadExt {
            base: &self.base + &rhs.base,
            surd: &self.surd + &rhs.surd,
            d: join_fields(self.d, rhs.d)?,
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        Ok(QuadExt {
            base: &self.base - &rhs.base,
            surd: &self.surd - &rhs.surd,
            d: join_fields(self.d, rhs.d)?,
        })
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        let d = join_fields(self.d, rhs.d)?;
        let dd = rat_int(d.unwrap_or(0));
        Ok(QuadExt {
            base: &self.base * &rhs.base + dd * &self.surd * &rhs.surd,
            surd: &self.base * &rhs.surd + &self.surd * &rhs.base,
            d,
        })
    }

    pub fn try_inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadExt { base: &self.base / &n, surd: -(&self.surd / &n), d: self.d })
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        join_fields(self.d, rhs.d)?;
        self.try_mul(&rhs.try_inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadExt { base: &self.base * r, surd: &self.surd * r, d: self.d }
    }

    /// Exact sign of the real number `base + surd*sqrt(d)`; requires `d > 0`
    /// or a rational value.
    pub fn real_signum(&self) -> Result<Ordering> {
        if self.surd.is_zero() {
            return Ok(self.base.cmp(&Rational::zero()));
        }
        let d = self.d.expect("surd without field");
        if d < 0 {
            return Err(Error::NotReal);
        }
        let sb = self.base.cmp(&Rational::zero());
        let ss = self.surd.cmp(&Rational::zero());
        if sb == ss || sb == Ordering::Equal {
            return Ok(ss);
        }
        // Opposite signs: compare base^2 with d*surd^2.
        let lhs = &self.base * &self.base;
        let rhs = rat_int(d) * &self.surd * &self.surd;
        Ok(match lhs.cmp(&rhs) {
            Ordering::Greater => sb,
            Ordering::Less => ss,
            Ordering::Equal => Ordering::Equal,
        })
    }

    /// `|self| <= bound` decided exactly, for real values.
    pub fn abs_le(&self, bound: &Rational) -> Result<bool> {
        let b = QuadExt::rational(bound.clone());
        let upper = b.try_sub(self)?.real_signum()?;
        let lower = b.try_add(self)?.real_signum()?;
        Ok(upper != Ordering::Less && lower != Ordering::Less)
    }

    /// Numeric rendering `(re, im)` for display only.
    pub fn to_f64_parts(&self) -> (f64, f64) {
        let b = ratio_to_f64(&self.base);
        let s = ratio_to_f64(&self.surd);
        match self.d {
            None => (b, 0.0),
            Some(d) if d > 0 => (b + s * (d as f64).sqrt(), 0.0),
            Some(d) => (b, s * ((-d) as f64).sqrt()),
        }
    }
}

/// Lossy conversion for display and tail estimates.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Rescale huge operands through their bit lengths.
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 60;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    if d.is_zero() {
        return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.surd == other.surd
            && (self.surd.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadExt {}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            return write!(f, "{}", self.base);
        }
        let d = self.d.unwrap_or(0);
        if self.base.is_zero() {
            write!(f, "{}*sqrt({d})", self.surd)
        } else {
            write!(f, "{} + {}*sqrt({d})", self.base, self.surd)
        }
    }
}

impl Zero for QuadExt {
    fn zero() -> Self {
        QuadExt::rational(Rational::zero())
    }

    fn is_zero(&self) -> bool {
        self.base.is_zero() && self.surd.is_zero()
    }
}

impl One for QuadExt {
    fn one() -> Self {
        QuadExt::rational(Rational::one())
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("QuadExt field mismatch")
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("QuadExt field mismatch")
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("QuadExt field mismatch")
    }
}

impl Div for QuadExt {
    type Output = QuadExt;
    fn div(self, rhs: Self) -> Self {
        self.try_div(&rhs).expect("QuadExt division failed")
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> Self {
        QuadExt { base: -self.base, surd: -self.surd, d: self.d }
    }
}

impl From<Rational> for QuadExt {
    fn from(r: Rational) -> Self {
        QuadExt::rational(r)
    }
}

#[derive(Serialize, Deserialize)]
struct QuadExtRepr {
    #[serde(with = "ratstr")]
    base: Rational,
    #[serde(with = "ratstr")]
    surd: Rational,
    d: Option<i64>,
}

impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadExtRepr { base: self.base.clone(), surd: self.surd.clone(), d: self.d }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QuadExtRepr::deserialize(d)?;
        match r.d {
            None if r.surd.is_zero() => Ok(QuadExt::rational(r.base)),
            None => Err(serde::de::Error::custom("surd without a field")),
            Some(d) => QuadExt::new(r.base, r.surd, d).map_err(serde::de::Error::custom),
        }
    }
}

/// `gcd` over a slice, zero for an empty or all-zero slice.
pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}
