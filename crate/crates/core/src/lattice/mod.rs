//! Linear algebra over the model ring and its residue field: Smith form
//! valuations, Fitting ideals, kernel chains, Frobenius-semilinear powers,
//! Newton slopes and saturated sublattices.

mod matrix;
mod newton;
mod residue_matrix;
mod saturation;
mod snf;

pub use matrix::ModelMatrix;
pub use newton::{
    charpoly, default_tolerance, determinant, newton_slopes, newton_slopes_bounded, round_to_denominator,
    semilinear_power, NewtonMode, LIMIT_MAX_POWER,
};
pub use residue_matrix::{kernel_rank_chain, kernel_rank_chain_quotient, ResidueMatrix};
pub use saturation::{
    columns_in_image, saturate, saturated_eigenlattices, saturated_kernel, saturation_ranks, solve,
};
pub use snf::{cofactor_det, fitting_valuations, minor_fitting_oracle, smith_valuations, ElementaryDivisors};
