//! Exact polygon invariants of p-divisible groups with `O_F`-action,
//! computed from matrix-level data over a truncated p-adic model ring.

pub mod cli;
pub mod error;
pub mod family;
pub mod invariants;
pub mod lattice;
pub mod polygon;
pub mod ring;

pub use error::{Error, Result};

/// Exact rational scalar used throughout.
pub type Rational = num_rational::BigRational;
/// Concave polygon with exact rational slopes.
pub type Polygon = polygon::ConcavePolygon<Rational>;
/// Break-point function with exact rational vertices.
pub type BreakFn = polygon::BreakFunction<Rational>;

/// `num / den` as a [`Rational`].
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}
