//! Bias-identification regressions.
//!
//! The baseline model regresses the shifted posterior shapes on the signal
//! counts and the shifted prior shapes:
//!
//! ```text
//! a~ - 1 = gamma_s k       + delta_s (a0 - 1)
//! b~ - 1 = gamma_f (n - k) + delta_f (b0 - 1)
//! ```
//!
//! The complete model adds dollar-task and streak interactions plus the
//! confirmation measure, and a variance equation with an intercept:
//!
//! ```text
//! a~ - 1 = (alpha0 + alpha_pref I_pref + alpha_seq I_seq_s) k       + rho_s c + delta_s (a0 - 1)
//! b~ - 1 = (beta0  + beta_pref  I_pref + beta_seq  I_seq_f) (n - k) + rho_f c + delta_f (b0 - 1)
//! Var~   = eta + nu Var_bayes
//! ```
//!
//! Shape equations have no intercept. Population fits use CR1 standard
//! errors clustered by subject; individual fits use the classical OLS
//! covariance.

mod classify;
mod covariance;
mod metrics;
mod models;
mod ols;
mod rows;
mod wald;

pub use classify::{
    classify_baseline, classify_complete, sidak_threshold, BiasKind, BiasReport, BiasTally,
    ClassifyOptions, Correction, DetectedBias, Hypothesis, ModelFamily, Side,
    SubjectClassification, COMPLETE_HYPOTHESES,
};
pub use covariance::{classical_cov, cluster_robust_cov};
pub use metrics::{fit_metrics, FitMetrics};
pub use models::{
    fit_baseline, fit_baseline_individual, fit_baseline_population, fit_complete,
    fit_complete_individual, fit_complete_population, BaselineFits, CompleteFits, CovarianceKind,
    Level, LevelFits, ModelFit, ModelId, SubjectFit,
};
pub use ols::{fit_no_intercept_ols, fit_ols, OlsFit};
pub use rows::{build_rows, Exclusion, ExclusionReason, RegressionRow, RowSet};
pub use wald::{wald_test, LinearCombination, TestResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationError {
    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("need more observations ({n}) than coefficients ({k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cluster-robust covariance needs at least 2 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("cluster {0} has no observations")]
    EmptyCluster(usize),
    #[error("no coefficient named {0:?}")]
    UnknownName(String),
    #[error("no usable rows")]
    NoRows,
    #[error("subject {subject}: {message}")]
    Schema { subject: String, message: String },
}
