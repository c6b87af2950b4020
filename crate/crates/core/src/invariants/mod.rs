//! The polygons attached to a structured datum and the comparisons between
//! them.

mod datum;
mod diag;
mod hn;
mod polygons;
pub mod random;
mod report;

pub use datum::{DieudonneData, StructuredDatum, SubobjectRecord};
pub use diag::{
    is_pi_diagonalisable, is_tame, pi_diagonalisable_criterion, pi_diagonalisable_direct, Diagonalisability,
};
pub use hn::{hn_p, hn_pi, hn_polygon, hn_tower_limit, TowerLimit};
pub use polygons::{
    degree_from_presentation, derive_r_tau, divisor_polygon, dual_integral_hodge, dual_matrix,
    dual_matrix_involution, hodge_chains, hodge_from_chain, hodge_special_fibre, hodge_special_fibre_per_upsilon,
    integral_hodge, newton_special_fibre, pappas_rapoport, pappas_rapoport_per_upsilon, pr_from_ranks, HodgeSource,
    IntegralHodge,
};
pub use report::*;
