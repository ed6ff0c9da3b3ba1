//! Calibrated distributionally robust optimization over finite families of
//! subpopulation cost functions.
//!
//! The library provides:
//!
//! - [`cost`]: the cost-family abstraction — dataset-backed expected losses
//!   (squared, logistic, hinge with L2) and the closed-form 1-D nonconvex
//!   counterexample pair — with exact gradients.
//! - [`optimize`]: deterministic full-batch mixture descent, the
//!   temperature-softmax group reweighting, and the running-average mixture
//!   update.
//! - [`dro`]: the outer Lagrangian saddle-point loop, per-group calibration
//!   baselines `r*`, and the baseline-gated recommendation pipeline.
//! - [`verify`]: independent oracles — finite-difference gradients, the
//!   min-norm point of the gradient hull (stationarity certificates), the
//!   converse perturbation test, curvature classification, the convex dual
//!   grid search, and 1-D landscape scans.
//! - [`scenarios`]: seeded generators for the two-subpopulation experiment
//!   and the discretized adversarial-perturbation family.
//! - [`report`]: the `dro-lab/1` run document and trajectory CSV.
//!
//! All computations are deterministic: seeded ChaCha streams drive every
//! random choice and per-example reductions run in fixed index order.

pub mod cost;
pub mod dro;
pub mod error;
pub mod optimize;
pub mod report;
pub mod scenarios;
pub mod serde_util;
pub mod verify;

pub use cost::{CostFamily, Example, GroupedDataset, LossKind, TaskKind};
pub use dro::{
    estimate_baseline, lagrangian_dro, recommend_pipeline, BaselineConfig, BaselineReport,
    DroConfig, DroSolution, RecommendConfig, RecommendationReport,
};
pub use error::{Error, Result};
pub use optimize::{
    average_update, descend, softmax_delta, CalibrationVector, DescentConfig, SimplexWeights,
};
pub use report::RunDocument;
pub use verify::{
    check_converse, check_stationarity, dual_grid_oracle, fd_gradient_oracle, landscape_scan_1d,
    min_norm_in_hull, CurvatureClass,
};
