//! Exact q-expansions of level-one modular forms.
//!
//! Everything is generated from `E_4`, `E_6` and `Delta`: the graded bases
//! are echelonized monomials `E_4^a E_6^b` (times `Delta` for cusp forms).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ratstr_vec, rat_int};
use crate::error::{Error, Result};
use crate::linalg::{inverse_rational, rank_rational, rref};
use crate::Rational;

/// `sum_{n <= prec} c_n q^n` attached to a weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSeries {
    pub weight: i64,
    pub prec: usize,
    #[serde(with = "ratstr_vec")]
    pub coeffs: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "M")]
    Modular,
    #[serde(rename = "S")]
    Cusp,
}

impl QSeries {
    /// `coeffs` holds `c_0..c_N`; the precision is `N`.
    pub fn new(weight: i64, coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a q-series needs at least c_0");
        QSeries { weight, prec: coeffs.len() - 1, coeffs }
    }

    pub fn from_integers(weight: i64, coeffs: &[i64]) -> Self {
        Self::new(weight, coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn zero(weight: i64, prec: usize) -> Self {
        Self::new(weight, vec![Rational::zero(); prec + 1])
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, prec: usize) -> Self {
        Self::new(self.weight, self.coeffs[..=prec.min(self.prec)].to_vec())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.weight, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.weight != other.weight {
            return Err(Error::WeightMismatch(self.weight, other.weight));
        }
        let p = self.prec.min(other.prec);
        Ok(Self::new(self.weight, (0..=p).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    /// Product; weights add and the precision is the smaller one.
    pub fn mul(&self, other: &Self) -> Self {
        let p = self.prec.min(other.prec);
        let mut out = vec![Rational::zero(); p + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(p + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(p + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(self.weight + other.weight, out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::new(0, {
            let mut c = vec![Rational::zero(); self.prec + 1];
            c[0] = Rational::one();
            c
        });
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// One coefficient per line, `n,num/den`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,coeff\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!("{i},{}\n", crate::arith::rational_to_string(c)));
        }
        s
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let q = match i {
                0 => String::new(),
                1 => "q".into(),
                _ => format!("q^{i}"),
            };
            if q.is_empty() || !mag.is_one() {
                write!(f, "{}", display_rational(&mag))?;
            }
            f.write_str(&q)?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", self.prec + 1)
    }
}

/// `"n"` for integers, `"n/d"` otherwise.
pub fn display_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Bernoulli numbers `B_0..B_m` with `B_1 = -1/2`.
fn bernoulli(m: usize) -> Vec<Rational> {
    let mut b = vec![Rational::zero(); m + 1];
    b[0] = Rational::one();
    for n in 1..=m {
        let mut s = Rational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate().take(n) {
            s += Rational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
        }
        b[n] = -s / Rational::from_integer(BigInt::from(n + 1));
    }
    b
}

fn sigma(k: u32, n: u64) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
}

/// Normalized Eisenstein series `1 - (2k / B_k) sum sigma_{k-1}(n) q^n`.
pub fn eisenstein(k: i64, prec: usize) -> Result<QSeries> {
    if ![4, 6, 12].contains(&k) {
        return Err(Error::InvalidArgument(format!("Eisenstein series of weight {k} is not provided (4, 6, 12)")));
    }
    let bk = bernoulli(k as usize)[k as usize].clone();
    let c = -rat_int(2 * k) / bk;
    let mut coeffs = vec![Rational::one()];
    for n in 1..=prec as u64 {
        coeffs.push(&c * Rational::from_integer(sigma(k as u32 - 1, n)));
    }
    Ok(QSeries::new(k, coeffs))
}

/// `q prod (1 - q^n)^24`.
pub fn delta(prec: usize) -> QSeries {
    let mut eta = vec![BigInt::zero(); prec + 1];
    eta[0] = BigInt::one();
    for n in 1..=prec {
        for i in (n..=prec).rev() {
            let t = eta[i - n].clone();
            eta[i] -= t;
        }
    }
    let base = QSeries::new(0, eta.into_iter().map(Rational::from_integer).collect());
    let p24 = base.pow(24);
    let mut coeffs = vec![Rational::zero()];
    coeffs.extend(p24.coeffs.into_iter().take(prec));
    QSeries::new(12, coeffs)
}

/// Monomials `E_4^a E_6^b` of weight `k`, most `E_4` first.
fn monomials(k: i64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if k < 0 || k % 2 != 0 {
        return out;
    }
    for b in 0..=k / 6 {
        let r = k - 6 * b;
        if r % 4 == 0 {
            out.push(((r / 4) as u32, b as u32));
        }
    }
    out.sort_by(|x, y| y.cmp(x));
    out
}

fn monomial(a: u32, b: u32, prec: usize) -> QSeries {
    let e4 = eisenstein(4, prec).expect("weight 4");
    let e6 = eisenstein(6, prec).expect("weight 6");
    let mut m = e4.pow(a).mul(&e6.pow(b));
    m.weight = i64::from(4 * a + 6 * b);
    m
}

pub fn dimension(k: i64, space: Space) -> usize {
    match space {
        Space::Modular => monomials(k).len(),
        Space::Cusp => monomials(k - 12).len(),
    }
}

/// Echelonized basis: row `i` has a leading 1 in its pivot column and zeros
/// in the other rows' pivot columns.
pub fn graded_basis(k: i64, space: Space, prec: usize) -> Result<Vec<QSeries>> {
    // dim + 2 coefficients q^0..q^prec: the solved window plus a surplus.
    let dim = dimension(k, space);
    if prec + 1 < dim + 2 {
        return Err(Error::InsufficientPrecision { need: dim + 1, have: prec });
    }
    let rows: Vec<QSeries> = match space {
        Space::Modular => monomials(k).into_iter().map(|(a, b)| monomial(a, b, prec)).collect(),
        Space::Cusp => {
            let d = delta(prec);
            monomials(k - 12).into_iter().map(|(a, b)| monomial(a, b, prec).mul(&d)).collect()
        }
    };
    let mut m: Vec<Vec<Rational>> = rows.into_iter().map(|r| r.coeffs).collect();
    let pivots = rref(&mut m);
    assert_eq!(pivots.len(), dim, "monomials must be independent");
    Ok(m.into_iter().map(|c| QSeries::new(k, c)).collect())
}

fn pivot_of(row: &QSeries) -> usize {
    row.coeffs.iter().position(|c| !c.is_zero()).expect("basis rows are nonzero")
}

/// Coordinates of `f` in the echelon basis of the space. Every coefficient
/// beyond the solved window must agree exactly.
pub fn identify(f: &QSeries, space: Space) -> Result<Vec<Rational>> {
    let basis = graded_basis(f.weight, space, f.prec)?;
    let coords: Vec<Rational> = basis.iter().map(|b| f.coeffs[pivot_of(b)].clone()).collect();
    check_residual(f, &basis, &coords)?;
    Ok(coords)
}

fn check_residual(f: &QSeries, basis: &[QSeries], coords: &[Rational]) -> Result<()> {
    for n in 0..=f.prec {
        let fit: Rational = basis.iter().zip(coords).map(|(b, c)| &b.coeffs[n] * c).sum();
        if fit != f.coeffs[n] {
            return Err(Error::NotInSpace { index: n });
        }
    }
    Ok(())
}

/// A form written in named generators, e.g. `E12 + 432000/691 * Delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identification {
    pub weight: i64,
    pub terms: Vec<(Rational, String)>,
}

impl fmt::Display for Identification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in &self.terms {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            if mag.is_one() {
                f.write_str(name)?;
            } else {
                write!(f, "{} * {name}", display_rational(&mag))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn monomial_name(a: u32, b: u32) -> Vec<String> {
    let mut parts = Vec::new();
    match a {
        0 => {}
        1 => parts.push("E4".to_string()),
        _ => parts.push(format!("E4^{a}")),
    }
    match b {
        0 => {}
        1 => parts.push("E6".to_string()),
        _ => parts.push(format!("E6^{b}")),
    }
    parts
}

/// Named generators: the Eisenstein series of weight `k` when available,
/// otherwise `E4^a E6^b`, followed by `Delta * E4^a E6^b` for the cusp part.
fn named_basis(k: i64, space: Space, prec: usize) -> Vec<(String, QSeries)> {
    let mut out = Vec::new();
    if space == Space::Modular && dimension(k, Space::Modular) > dimension(k, Space::Cusp) {
        match eisenstein(k, prec) {
            Ok(e) => out.push((format!("E{k}"), e)),
            Err(_) => {
                let (a, b) = monomials(k)[0];
                out.push((monomial_name(a, b).join("*"), monomial(a, b, prec)));
            }
        }
    }
    let d = delta(prec);
    for (a, b) in monomials(k - 12) {
        let mut parts = monomial_name(a, b);
        parts.push("Delta".into());
        let mut s = monomial(a, b, prec).mul(&d);
        s.weight = k;
        out.push((parts.join("*"), s));
    }
    out
}

/// Decomposition of `f` in named generators, with the same exact residual
/// check as [`identify`].
pub fn identify_named(f: &QSeries, space: Space) -> Result<Identification> {
    let basis = graded_basis(f.weight, space, f.prec)?;
    let named = named_basis(f.weight, space, f.prec);
    let pivots: Vec<usize> = basis.iter().map(pivot_of).collect();
    let m: Vec<Vec<Rational>> =
        named.iter().map(|(_, s)| pivots.iter().map(|&p| s.coeffs[p].clone()).collect()).collect();
    let target: Vec<Rational> = pivots.iter().map(|&p| f.coeffs[p].clone()).collect();
    let coords: Vec<Rational> = if m.is_empty() {
        Vec::new()
    } else {
        // x * m = target
        let inv = inverse_rational(&m).ok_or_else(|| Error::Construction("named generators are dependent".into()))?;
        (0..m.len()).map(|j| (0..m.len()).map(|i| &target[i] * &inv[i][j]).sum()).collect()
    };
    let series: Vec<QSeries> = named.iter().map(|(_, s)| s.clone()).collect();
    check_residual(f, &series, &coords)?;
    Ok(Identification { weight: f.weight, terms: coords.into_iter().zip(named.into_iter().map(|(n, _)| n)).collect() })
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `T_p`: `a(n) -> a(pn) + p^(k-1) a(n/p)`, to precision `floor(prec / p)`.
pub fn hecke(p: u64, f: &QSeries) -> Result<QSeries> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let out_prec = f.prec / p as usize;
    if out_prec == 0 {
        return Err(Error::InsufficientPrecision { need: p as usize, have: f.prec });
    }
    let pk = Rational::from_integer(BigInt::from(p).pow((f.weight - 1) as u32));
    let coeffs = (0..=out_prec)
        .map(|n| {
            let mut c = f.coeffs[p as usize * n].clone();
            if n % p as usize == 0 {
                c += &pk * &f.coeffs[n / p as usize];
            }
            c
        })
        .collect();
    Ok(QSeries::new(f.weight, coeffs))
}

/// Rank over `Q` of the coefficients `q^1..q^prec`.
pub fn span_rank(fs: &[QSeries], k: i64, prec: usize) -> Result<usize> {
    if let Some(f) = fs.iter().find(|f| f.weight != k) {
        return Err(Error::WeightMismatch(k, f.weight));
    }
    // Full rank is reachable once there are as many columns as dim S_k.
    let need = dimension(k, Space::Cusp).max(1);
    if prec < need {
        return Err(Error::InsufficientPrecision { need, have: prec });
    }
    if let Some(f) = fs.iter().find(|f| f.prec < prec) {
        return Err(Error::InsufficientPrecision { need: prec, have: f.prec });
    }
    let rows: Vec<Vec<Rational>> = fs.iter().map(|f| f.coeffs[1..=prec].to_vec()).collect();
    Ok(rank_rational(&rows))
}
