//! Scalar abstractions shared by the octonion and Albert-algebra code.
//!
//! Everything in the algebra layer is generic over [`Scalar`], a commutative
//! ring with identity. Exact work uses [`crate::Rational`] and
//! [`crate::QuadExt`]; the enumeration hot paths use `i64` on doubled
//! coordinates; `f64` is accepted for numeric experiments.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// A commutative ring with identity.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// The image of an integer under the canonical map `Z -> Self`.
    fn from_i64(n: i64) -> Self {
        let mut acc = Self::zero();
        let mut base = Self::one();
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc + base.clone();
            }
            base = base.clone() + base;
            m >>= 1;
        }
        if n < 0 {
            -acc
        } else {
            acc
        }
    }
}

impl<T> Scalar for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
        + 'static
{
}

/// A [`Scalar`] in which every nonzero element is invertible.
pub trait FieldScalar: Scalar + Div<Output = Self> {
    fn half(self) -> Self {
        self / Self::from_i64(2)
    }
}

impl<T: Scalar + Div<Output = T>> FieldScalar for T {}

/// Square-and-multiply power.
pub fn pow<S: Scalar>(base: &S, mut exp: u32) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b.clone();
        }
        exp >>= 1;
        if exp > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn from_i64_matches_native() {
        for n in [-17i64, -1, 0, 1, 2, 5, 1024, 999_999] {
            assert_eq!(<i64 as Scalar>::from_i64(n), n);
            assert_eq!(<Rational as Scalar>::from_i64(n), Rational::from_integer(n.into()));
        }
    }

    #[test]
    fn pow_small() {
        assert_eq!(pow(&3i64, 0), 1);
        assert_eq!(pow(&3i64, 5), 243);
        assert_eq!(pow(&-2i64, 7), -128);
    }
}
