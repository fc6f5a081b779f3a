//! Edge-preserving smoothing and base/detail decomposition.

mod bilateral;
mod decompose;
mod grid;
mod params;
pub mod solver;
pub mod wls;

pub use bilateral::bilateral_direct;
pub use decompose::{decompose, EdgeFilter, LayerPair};
pub use grid::bilateral_fast;
pub use params::{BilateralParams, WlsParams};
pub use solver::{
    solve_spd, solve_spd_from, solve_spd_preconditioned, CsrMatrix, Jacobi, Preconditioner, Solution,
    SpdOperator,
};
pub use wls::{
    wls_smooth, wls_smooth_with_stats, IncompleteCholesky, WlsStats, WlsSystem, LOG_DELTA,
};
