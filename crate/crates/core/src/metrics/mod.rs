//! Automatic metrics: log-probability statistics of selected responses and
//! distinct-n over candidate sets (pre-selection) and selected responses
//! (post-selection).
//!
//! `<eos>` is not content and must be stripped from every sequence before it
//! gets here.

mod distinct;
mod report;
mod stats;

use thiserror::Error;

pub use distinct::{distinct_n, distinct_n_grouped, Distinct, Pooling};
pub use report::{
    build_report, ConversationMetricsInput, DistinctCell, MetricsReport, StrategyRow, TurnMetrics,
    DISTINCT_ORDERS,
};
pub use stats::{compensated_sum, logp_stats, MeanStd};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("n-gram order must be at least 1")]
    InvalidN,
    #[error("no conversation contains any tokens")]
    NoTokens,
    #[error("empty input")]
    Empty,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("invalid metrics input: {0}")]
    InvalidInput(String),
}
