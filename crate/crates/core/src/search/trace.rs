use serde::{Deserialize, Serialize};

use super::{hamming_dissimilarity, Hypothesis};
use crate::lm::TokenId;

/// The hypotheses kept after one expansion step: the live beam plus the
/// hypotheses that finished at this step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub live: Vec<Hypothesis>,
    pub finished: Vec<Hypothesis>,
}

impl TraceStep {
    pub fn hypotheses(&self) -> impl Iterator<Item = &Hypothesis> {
        self.live.iter().chain(&self.finished)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationOutcome {
    /// At least one hypothesis ended in `<eos>`.
    Finished,
    /// Nothing finished; the best partial hypothesis was closed with `<eos>`.
    ForceTerminated,
    /// Every candidate was pruned before any partial hypothesis survived.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub outcome: IterationOutcome,
    /// `steps[t]` holds hypotheses of length `t + 1`.
    pub steps: Vec<TraceStep>,
}

/// Every partial hypothesis set explored by a search, per iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub iterations: Vec<IterationTrace>,
}

/// A hypothesis from a later iteration that lies within `epsilon` of an
/// equal-length hypothesis explored by an earlier iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionViolation {
    pub iteration: usize,
    pub earlier_iteration: usize,
    pub tokens: Vec<TokenId>,
    pub earlier_tokens: Vec<TokenId>,
    pub distance: f64,
}

impl SearchTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Brute-force audit of the exclusion rule: compares every surviving
    /// hypothesis of every iteration against every hypothesis of all earlier
    /// iterations.
    pub fn exclusion_violations(&self, epsilon: f64) -> Vec<ExclusionViolation> {
        let mut out = Vec::new();
        for (l, it) in self.iterations.iter().enumerate() {
            for h in it.steps.iter().flat_map(TraceStep::hypotheses) {
                for earlier in &self.iterations[..l] {
                    for g in earlier.steps.iter().flat_map(TraceStep::hypotheses) {
                        let d = hamming_dissimilarity(&h.tokens, &g.tokens);
                        if d < epsilon {
                            out.push(ExclusionViolation {
                                iteration: it.iteration,
                                earlier_iteration: earlier.iteration,
                                tokens: h.tokens.clone(),
                                earlier_tokens: g.tokens.clone(),
                                distance: d,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
