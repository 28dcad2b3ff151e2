//! Truncated polynomials in two formal parameters `s, t`, used to expand the
//! cubic norm exactly.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// `sum c[i][j] s^i t^j` with `s^(D+1) = t^(D+1) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S, const D: usize> {
    c: [[S; 4]; 4],
}

impl<S: Scalar, const D: usize> Jet<S, D> {
    const _CHECK: () = assert!(D <= 3, "Jet supports degree at most 3 per variable");

    pub fn constant(v: S) -> Self {
        let mut j = Self::zero();
        j.c[0][0] = v;
        j
    }

    /// `v * s`.
    pub fn s(v: S) -> Self {
        let mut j = Self::zero();
        if D >= 1 {
            j.c[1][0] = v;
        }
        j
    }

    /// `v * t`.
    pub fn t(v: S) -> Self {
        let mut j = Self::zero();
        if D >= 1 {
            j.c[0][1] = v;
        }
        j
    }

    /// Coefficient of `s^i t^j`.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        if i > D || j > D {
            S::zero()
        } else {
            self.c[i][j].clone()
        }
    }
}

impl<S: Scalar, const D: usize> Zero for Jet<S, D> {
    fn zero() -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::_CHECK;
        Jet { c: std::array::from_fn(|_| std::array::from_fn(|_| S::zero())) }
    }

    fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(Zero::is_zero)
    }
}

impl<S: Scalar, const D: usize> One for Jet<S, D> {
    fn one() -> Self {
        Self::constant(S::one())
    }
}

impl<S: Scalar, const D: usize> Add for Jet<S, D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet { c: std::array::from_fn(|i| std::array::from_fn(|j| self.c[i][j].clone() + rhs.c[i][j].clone())) }
    }
}

impl<S: Scalar, const D: usize> Sub for Jet<S, D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet { c: std::array::from_fn(|i| std::array::from_fn(|j| self.c[i][j].clone() - rhs.c[i][j].clone())) }
    }
}

impl<S: Scalar, const D: usize> Neg for Jet<S, D> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet { c: std::array::from_fn(|i| std::array::from_fn(|j| -self.c[i][j].clone())) }
    }
}

impl<S: Scalar, const D: usize> Mul for Jet<S, D> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i1 in 0..=D {
            for j1 in 0..=D {
                if self.c[i1][j1].is_zero() {
                    continue;
                }
                for i2 in 0..=D - i1 {
                    for j2 in 0..=D - j1 {
                        if rhs.c[i2][j2].is_zero() {
                            continue;
                        }
                        let p = self.c[i1][j1].clone() * rhs.c[i2][j2].clone();
                        out.c[i1 + i2][j1 + j2] = out.c[i1 + i2][j1 + j2].clone() + p;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nilpotent_truncation() {
        let s = Jet::<i64, 1>::s(1);
        let t = Jet::<i64, 1>::t(1);
        assert!((s.clone() * s.clone()).is_zero());
        assert_eq!((s.clone() * t.clone()).coeff(1, 1), 1);
        let x = Jet::<i64, 1>::constant(3) + s + t;
        let cube = x.clone() * x.clone() * x;
        assert_eq!(cube.coeff(0, 0), 27);
        assert_eq!(cube.coeff(1, 0), 27);
        assert_eq!(cube.coeff(1, 1), 18);
    }

    #[test]
    fn cubic_expansion() {
        let x = Jet::<i64, 3>::constant(2) + Jet::t(1);
        let cube = x.clone() * x.clone() * x;
        assert_eq!((0..4).map(|j| cube.coeff(0, j)).collect::<Vec<_>>(), vec![8, 12, 6, 1]);
    }
}
