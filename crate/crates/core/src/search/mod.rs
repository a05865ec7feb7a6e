//! Greedy, beam and iterative beam search over a [`DistributionProvider`].
//!
//! All searches are pure functions of (model, context, config). Ties are
//! broken deterministically, so repeated runs produce identical output.
//!
//! Raw cumulative log-probabilities drive pruning; the length penalty is only
//! applied when a final response is selected from a [`CandidateSet`].

mod beam;
mod config;
mod filters;
mod greedy;
mod hypothesis;
mod iterative;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use beam::{beam_search, beam_step, StepResult};
pub use config::{IterMode, SearchConfig};
pub use filters::{blocks_ngram, hamming_dissimilarity};
pub use greedy::greedy_decode;
pub use hypothesis::{length_penalized_score, select_final, Candidate, CandidateSet, Hypothesis};
pub use iterative::iterative_beam_search;
pub use trace::{ExclusionViolation, IterationOutcome, IterationTrace, SearchTrace, TraceStep};

use crate::lm::{Context, DistributionProvider, LmError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Model(#[from] LmError),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("beam step needs a nonempty set of unfinished hypotheses")]
    InvalidHypotheses,
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
}

/// A decoding strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "beam")]
    Beam,
    #[serde(rename = "iter-beam")]
    IterBeam,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Greedy, Strategy::Beam, Strategy::IterBeam];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Beam => "beam",
            Strategy::IterBeam => "iter-beam",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| SearchError::UnknownStrategy(s.to_owned()))
    }
}

/// Result of running a strategy on one context.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub candidates: CandidateSet,
    /// Index of the selected response in `candidates`.
    pub selected: usize,
    pub trace: Option<SearchTrace>,
}

impl Decoded {
    pub fn selected(&self) -> &Candidate {
        &self.candidates.candidates[self.selected]
    }
}

/// Runs `strategy` and selects the final response. Iterative beam search uses
/// `cfg.mode`.
pub fn decode<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    strategy: Strategy,
    cfg: &SearchConfig,
) -> Result<Decoded, SearchError> {
    let (candidates, trace) = match strategy {
        Strategy::Greedy => {
            let hyp = greedy_decode(model, ctx, cfg)?;
            let forced = hyp.len() > cfg.max_length;
            let cand = Candidate::new(hyp, cfg.length_penalty_alpha, 0, forced);
            (
                CandidateSet {
                    candidates: vec![cand],
                },
                None,
            )
        }
        Strategy::Beam => {
            let (c, t) = beam_search(model, ctx, cfg)?;
            (c, Some(t))
        }
        Strategy::IterBeam => {
            let (c, t) = iterative_beam_search(model, ctx, cfg, cfg.mode)?;
            (c, Some(t))
        }
    };
    let selected = candidates.best_index().ok_or(SearchError::EmptyCandidates)?;
    Ok(Decoded {
        candidates,
        selected,
        trace,
    })
}
