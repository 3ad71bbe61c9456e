//! Panel-data inference with cluster-robust covariance estimators.
//!
//! The crate estimates linear panel regressions by least squares or the
//! two-way within (fixed-effects) estimator and builds sandwich covariance
//! matrices from a family of score-covariance estimators: unclustered
//! (EHW), one-way clustered by unit or time, two-way clustered (CGM),
//! two-way with unweighted lag terms (Thompson), and two-way with
//! kernel-weighted lag terms, data-driven lag truncation, and an
//! eigenvalue correction — robust to serially correlated common time
//! effects. A deterministic Monte Carlo harness reproduces the
//! coverage and power experiments for these estimators.

pub mod bandwidth;
pub mod error;
pub mod montecarlo;
pub mod panel;
pub mod regression;
mod serde_matrix;
pub mod variance;

pub use error::{Error, Result};
pub use panel::{load_long_csv, to_balanced, within_transform, BalancedPanel, CsvSchema, LongPanel};
pub use regression::{
    fe_fit, inference_table, ols_fit, sandwich, time_effect_diagnostics, wald_test, ColumnRef,
    CovarianceResult, InferenceRow, RegressionFit,
};
pub use variance::{
    cluster_sums, evc, kernel_weight, lag_cross_sums, omega_cgm, omega_chs, omega_cluster,
    omega_ehw, omega_thompson, scores, ClusterAxis, ClusterSums, OmegaEstimate, OmegaKind,
    ScoreMatrix, WeightKind,
};
