//! The unramified local zeta integral: the inner integral `I_n(p)`, the
//! truncated torus sum, and the closed Euler factor, all exact in `Q(sqrt p)`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{ratio_to_f64, rational_to_string, QuadExt};
use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatakeParam {
    pub alpha: Rational,
    pub p: u64,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn ppow(p: u64, e: u32) -> Rational {
    Rational::from_integer(BigInt::from(p).pow(e))
}

/// `p^-e`.
fn pinv(p: u64, e: u32) -> Rational {
    ppow(p, e).recip()
}

impl SatakeParam {
    /// Requires `alpha != 0`, `p` prime and `alpha^2 < p^5`.
    pub fn new(alpha: Rational, p: u64) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::InvalidArgument("alpha must be nonzero".into()));
        }
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        let s = SatakeParam { alpha, p };
        if &s.alpha * &s.alpha >= ppow(p, 5) || s.alpha.recip() * s.alpha.recip() >= ppow(p, 5) {
            return Err(Error::InvalidArgument("the sum diverges unless alpha^2 and alpha^-2 are below p^5".into()));
        }
        Ok(s)
    }

    fn sqrt_p(&self) -> QuadExt {
        QuadExt::sqrt(self.p as i64).expect("a prime is squarefree")
    }

    fn lift(&self, r: Rational) -> QuadExt {
        QuadExt::rational_in(r, self.p as i64).expect("a prime is squarefree")
    }
}

/// `I_n(p) = (1 - p^-4)(1 - p^(-3n-3)) / (1 - p^-3)`, checked against the
/// additive form `1 + sum_{m=1}^n p^-3m (1 - p^-1) - p^(-3(n+1)-1)`.
pub fn inner_integral(n: u32, p: u64) -> Result<Rational> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let one = Rational::one();
    let closed = (&one - pinv(p, 4)) * (&one - pinv(p, 3 * n + 3)) / (&one - pinv(p, 3));
    let mut additive = one.clone();
    for m in 1..=n {
        additive += pinv(p, 3 * m) * (&one - pinv(p, 1));
    }
    additive -= pinv(p, 3 * (n + 1) + 1);
    if closed != additive {
        return Err(Error::Verification(format!("inner integral forms disagree at n={n}, p={p}")));
    }
    Ok(closed)
}

/// `(alpha^(n+1) - alpha^(-n-1)) / (alpha - alpha^-1)`, with the limits
/// `n+1` at `alpha = 1` and `(-1)^n (n+1)` at `alpha = -1`.
pub fn satake_bracket(alpha: &Rational, n: u32) -> Rational {
    let one = Rational::one();
    if alpha == &one {
        return Rational::from_integer(BigInt::from(n + 1));
    }
    if alpha == &-one.clone() {
        let v = Rational::from_integer(BigInt::from(n + 1));
        return if n % 2 == 0 { v } else { -v };
    }
    let inv = alpha.recip();
    (num_traits::pow(alpha.clone(), n as usize + 1) - num_traits::pow(inv.clone(), n as usize + 1)) / (alpha - inv)
}

/// `p^(-5n/2)` in `Q(sqrt p)`.
fn half_power(s: &SatakeParam, five_n: u32) -> QuadExt {
    if five_n % 2 == 0 {
        s.lift(pinv(s.p, five_n / 2))
    } else {
        // p^(-(k+1/2)) = sqrt(p) / p^(k+1)
        s.sqrt_p().scale(&pinv(s.p, five_n / 2 + 1))
    }
}

/// `sum_{n=0}^{N} p^(-5n/2) [bracket_n] I_n(p)`.
pub fn zeta_truncated(s: &SatakeParam, terms: u32) -> Result<QuadExt> {
    let mut acc = s.lift(Rational::zero());
    for n in 0..=terms {
        let c = satake_bracket(&s.alpha, n) * inner_integral(n, s.p)?;
        acc = acc.try_add(&half_power(s, 5 * n).scale(&c))?;
    }
    Ok(acc)
}

/// `(1-p^-4)(1-p^-8) / [(1-p^(-5/2)a)(1-p^(-5/2)/a)(1-p^(-11/2)a)(1-p^(-11/2)/a)]`.
pub fn zeta_closed(s: &SatakeParam) -> Result<QuadExt> {
    let one = Rational::one();
    let num = s.lift((&one - pinv(s.p, 4)) * (&one - pinv(s.p, 8)));
    let mut den = s.lift(one.clone());
    for e in [5u32, 11] {
        let h = half_power(s, e);
        for a in [s.alpha.clone(), s.alpha.recip()] {
            let factor = s.lift(one.clone()).try_sub(&h.scale(&a))?;
            if factor.is_zero_value() {
                return Err(Error::DivisionByZero);
            }
            den = den.try_mul(&factor)?;
        }
    }
    num.try_div(&den)
}

trait ZeroValue {
    fn is_zero_value(&self) -> bool;
}

impl ZeroValue for QuadExt {
    fn is_zero_value(&self) -> bool {
        self.base().is_zero() && self.surd().is_zero()
    }
}

/// `p^(-5N/2) max(|a|, 1/|a|)^N * 10`.
pub fn tail_bound(s: &SatakeParam, terms: u32) -> QuadExt {
    let a = s.alpha.abs();
    let m = if a >= Rational::one() { a } else { a.recip() };
    half_power(s, 5 * terms).scale(&(num_traits::pow(m, terms as usize) * Rational::from_integer(10.into())))
}

/// Decimal value of a real element of `Q(sqrt p)` without cancellation.
pub fn real_to_f64(x: &QuadExt) -> f64 {
    let b = x.base();
    let s = x.surd();
    let d = x.field().unwrap_or(0) as f64;
    if s.is_zero() || b.is_zero() || b.is_positive() == s.is_positive() {
        return ratio_to_f64(b) + ratio_to_f64(s) * d.sqrt();
    }
    // b + s sqrt(d) = (b^2 - d s^2) / (b - s sqrt(d))
    ratio_to_f64(&x.norm()) / (ratio_to_f64(b) - ratio_to_f64(s) * d.sqrt())
}

fn abs_real(x: &QuadExt) -> Result<QuadExt> {
    Ok(if x.real_signum()? == Ordering::Less { x.scale(&-Rational::one()) } else { x.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaRow {
    pub alpha: String,
    pub p: u64,
    pub terms: u32,
    pub truncated: f64,
    pub closed: f64,
    pub abs_difference: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Compares the truncated sum against the closed form; the comparison with
/// the tail bound is exact.
pub fn compare(s: &SatakeParam, terms: u32) -> Result<ZetaRow> {
    let t = zeta_truncated(s, terms)?;
    let c = zeta_closed(s)?;
    let diff = abs_real(&t.try_sub(&c)?)?;
    let bound = tail_bound(s, terms);
    let within = bound.try_sub(&diff)?.real_signum()? != Ordering::Less;
    Ok(ZetaRow {
        alpha: crate::modforms::display_rational(&s.alpha),
        p: s.p,
        terms,
        truncated: real_to_f64(&t),
        closed: real_to_f64(&c),
        abs_difference: real_to_f64(&diff),
        bound: real_to_f64(&bound),
        within_bound: within,
    })
}

pub fn rows_to_csv(rows: &[ZetaRow]) -> String {
    let mut s = String::from("alpha,p,N,truncated,closed,abs_difference,bound,within_bound\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.17e},{:.17e},{:.6e},{:.6e},{}\n",
            r.alpha, r.p, r.terms, r.truncated, r.closed, r.abs_difference, r.bound, r.within_bound
        ));
    }
    s
}

/// Exact string rendering `base + surd*sqrt(p)`.
pub fn exact_string(x: &QuadExt) -> String {
    format!("{} + {}*sqrt({})", rational_to_string(x.base()), rational_to_string(x.surd()), x.field().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    #[test]
    fn inner_integral_values() {
        assert_eq!(inner_integral(0, 3).unwrap(), rat_int(1) - rat(1, 81));
        assert_eq!(inner_integral(1, 2).unwrap(), rat(135, 128));
        for p in [2, 3, 5] {
            for n in 0..=20 {
                inner_integral(n, p).unwrap();
            }
        }
        assert!(inner_integral(1, 4).is_err());
    }

    #[test]
    fn single_term() {
        let s = SatakeParam::new(rat_int(1), 2).unwrap();
        let z = zeta_truncated(&s, 0).unwrap();
        assert_eq!(z, QuadExt::rational(rat(15, 16)));
    }

    #[test]
    fn symmetric_in_alpha() {
        for p in [2, 3, 5] {
            let a = SatakeParam::new(rat(3, 7), p).unwrap();
            let b = SatakeParam::new(rat(7, 3), p).unwrap();
            assert_eq!(zeta_truncated(&a, 9).unwrap(), zeta_truncated(&b, 9).unwrap());
            assert_eq!(zeta_closed(&a).unwrap(), zeta_closed(&b).unwrap());
        }
    }

    #[test]
    fn bracket_limits() {
        for n in 0..6 {
            let near = satake_bracket(&rat(-1, 1), n);
            let v = rat_int(i64::from(n) + 1);
            assert_eq!(near, if n % 2 == 0 { v } else { -v });
        }
        assert_eq!(satake_bracket(&rat(2, 1), 1), rat(5, 2));
    }

    #[test]
    fn truncation_converges() {
        let s = SatakeParam::new(rat(1, 2), 3).unwrap();
        let c = zeta_closed(&s).unwrap();
        let mut last = f64::INFINITY;
        for n in [5, 10, 20] {
            let d = real_to_f64(&abs_real(&zeta_truncated(&s, n).unwrap().try_sub(&c).unwrap()).unwrap());
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn precondition() {
        assert!(SatakeParam::new(rat_int(0), 2).is_err());
        assert!(SatakeParam::new(rat_int(6), 2).is_err());
        assert!(SatakeParam::new(rat_int(5), 2).is_ok());
        assert!(SatakeParam::new(rat_int(2), 6).is_err());
    }

    #[test]
    fn stable_rendering() {
        // 1 - sqrt(2) * 70/99 is tiny and positive.
        let x = QuadExt::new(rat_int(1), rat(-70, 99), 2).unwrap();
        let v = real_to_f64(&x);
        assert!((v - (1.0 - 70.0 / 99.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(v > 0.0);
    }
}
