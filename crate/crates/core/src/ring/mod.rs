//! Truncated model `(W(F_q)/p^M)[u]/(u^N - p)` of a discretely valued ring,
//! with valuation and absolute-precision tracking, residue map and Frobenius.

mod elem;
mod params;
mod residue;
mod shorthand;

pub use elem::RingElem;
pub use params::{default_residue_poly, ModelRingParams, DEFAULT_PRECISION};
pub use residue::{Fq, ResidueField};
pub use shorthand::parse_shorthand;
