//! Decoding and evaluation workbench for autoregressive dialogue models.
//!
//! - [`lm`]: the next-token distribution contract and two concrete models.
//! - [`search`]: greedy, beam and iterative beam search.
//! - [`metrics`]: log-probability statistics and distinct-n reports.
//! - [`calibration`]: Bayesian calibration of human evaluation scores.
//! - [`evalsvc`]: the human evaluation protocol, transcripts and self-play.

pub mod calibration;
pub mod evalsvc;
pub mod lm;
pub mod metrics;
pub mod search;
