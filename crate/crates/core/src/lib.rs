//! Fusion of aligned visible (RGB) and near-infrared (NIR) image pairs through
//! edge-preserving base/detail decompositions, together with the dense-SIFT
//! matching protocol used to measure whether a fused image carries more stable
//! local features than the RGB original.
//!
//! The crate is organised bottom-up:
//!
//! - [`image`]: planar intensity images, BT.601 YCbCr conversion, raster IO and
//!   full-reference metrics (MSE, PSNR).
//! - [`filters`]: bilateral filtering (direct and bilateral-grid), weighted
//!   least squares smoothing over a preconditioned CG solver, and
//!   base/detail decomposition.
//! - [`fusion`]: BFWLS-Avg / BFWLS-Max fusion and the single-filter
//!   detail-swap baselines.
//! - [`eval`]: synthetic transforms, dense SIFT, ratio-test matching and
//!   per-image evaluation rows.
//! - [`harness`]: configuration, dataset discovery, batch orchestration and
//!   CSV / text reports.
//! - [`synth`]: seeded synthetic RGB/NIR scenes.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod filters;
pub mod fusion;
pub mod harness;
pub mod image;
pub mod synth;

pub use error::{Error, Result};
