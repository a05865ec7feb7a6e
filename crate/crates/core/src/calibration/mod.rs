//! Bayesian calibration of human evaluation scores.
//!
//! Star model: `mu_i ~ U(1, 4)`, `M_i ~ N(mu_i, 1)`, annotator bias
//! `B_j ~ N(0, 1)`, scores `S_ij ~ N(M_i + B_j, 1)`.
//!
//! Binary model: `M_i, B_j, T_k ~ N(0, 1)` and
//! `S_ijk ~ Bernoulli(sigmoid(M_i + B_j + T_k))`.
//!
//! All variances are fixed to 1. Every strategy is calibrated in one joint
//! run so annotators who saw several strategies link their estimates.

mod model;
mod observations;
mod quadrature;
mod sampler;
mod summary;

use thiserror::Error;

pub use model::{
    log_bernoulli_logit, log_joint_binary, log_joint_star, log_normal, log_sigmoid, sigmoid,
    BinaryModelState, BinaryTarget, StarModelState, StarTarget,
};
pub use observations::{BinaryLabel, BinaryObservations, StarObservations, StarScore};
pub use quadrature::{quadrature_oracle_binary, quadrature_oracle_star, GridConfig, OracleResult, MAX_ORACLE_DIM};
pub use sampler::{sample, Chain, Diagnostics, SamplerConfig, Target};
pub use summary::{
    calibrate_binary, calibrate_star, posterior_summary_binary, posterior_summary_star,
    CalibrationResult, ModelKind, ModelPosterior, Moments,
};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("invalid observations: {0}")]
    InvalidObservations(String),
    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("state dimensions do not match the observations")]
    DimensionMismatch,
    #[error("log density is not finite at the initial state")]
    Initialization,
    #[error("invalid calibration configuration: {0}")]
    InvalidConfig(String),
    #[error("no samples")]
    NoSamples,
    #[error("quadrature oracle supports at most {MAX_ORACLE_DIM} latents, got {0}")]
    OracleDimension(usize),
}
