//! Numerical laboratory for the augmentation-graph view of contrastive
//! learning under data inflation.
//!
//! The crate builds augmentation graphs from synthetic 2-D data, computes the
//! spectral quantities that govern linear-probe generalization (labeling error
//! `α`, the `(k+1)`-th Laplacian eigenvalue, the real/generated TV gap) and
//! runs deterministic studies that check the resulting error bound
//!
//! ```text
//! E(f, B) <= 8 α / λ_{k+1} + 16 α + 2 (1 - β) TV(P_d, P_g)
//! ```
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`distributions`] | Gaussian-mixture / uniform sampling, weighted mixing, discretization |
//! | [`grid`] | regular grid over the augmented space |
//! | [`aug_graph`] | disk-kernel augmentation graphs, threshold graphs, subsampling |
//! | [`spectral`] | dense symmetric eigensolver, spectral gap, optimal spectral embedding |
//! | [`metrics`] | `α`, `φ^y`, TV distance, the bound, linear probe, majority vote |
//! | [`studies`] | the reproducible experiments |
//! | [`config`] / [`cli`] | TOML configuration and the `aglab` command line |

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these range checks

pub mod aug_graph;
pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod seed;
pub mod spectral;
pub mod studies;
pub mod svg;

mod linalg;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point2 = [f64; 2];
