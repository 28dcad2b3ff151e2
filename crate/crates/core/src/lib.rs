//! Exceptional theta series on the two Euclidean Albert lattices, computed
//! in exact arithmetic.
//!
//! The algebra layer ([`octonion`], [`albert`]) is generic over the scalar
//! ring; the aliases below name the instantiations the rest of the crate
//! uses.

pub mod albert;
pub mod arith;
pub mod enumerate;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod localzeta;
pub mod modforms;
pub mod octonion;
pub mod scalar;
pub mod shortvec;
pub mod verify;
pub mod weightpoly;

pub use albert::AlbertElement;
pub use arith::QuadExt;
pub use error::{Error, Result};
pub use lattice::{AlbertLattice, LatticeName};
pub use modforms::QSeries;
pub use octonion::Octonion;
pub use scalar::{FieldScalar, Scalar};

/// Arbitrary-precision rationals, always in lowest terms.
pub type Rational = num_rational::BigRational;

pub type RatOctonion = Octonion<Rational>;
pub type QuadOctonion = Octonion<QuadExt>;
/// Octonions over `Z`; the enumeration code stores doubled coordinates here.
pub type IntOctonion = Octonion<i64>;
pub type F64Octonion = Octonion<f64>;

pub type RatAlbert = AlbertElement<Rational>;
pub type QuadAlbert = AlbertElement<QuadExt>;
/// Albert elements over `Z`; used with doubled coordinates.
pub type IntAlbert = AlbertElement<i64>;
pub type F64Albert = AlbertElement<f64>;
