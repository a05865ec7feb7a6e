use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SearchError;

/// Schedule for iterative beam search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterMode {
    /// Iteration `l` runs to completion before iteration `l + 1` starts.
    Sequential,
    /// All iterations advance one timestep together.
    #[default]
    Parallel,
}

impl FromStr for IterMode {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(IterMode::Sequential),
            "parallel" => Ok(IterMode::Parallel),
            other => Err(SearchError::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for IterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IterMode::Sequential => "sequential",
            IterMode::Parallel => "parallel",
        })
    }
}

/// Search hyper-parameters.
///
/// Serialized as a flat TOML table whose keys match the field names, e.g.
///
/// ```toml
/// beam_width = 5
/// max_candidates = 15
/// iterations = 15
/// epsilon = 1.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// K: partial hypotheses kept per step.
    pub beam_width: usize,
    /// K′: finished hypotheses that stop a beam search.
    pub max_candidates: usize,
    /// L_max: longest response, counting `<eos>`.
    pub max_length: usize,
    /// Size of the n-grams that may not repeat; 0 disables blocking.
    pub block_ngram: usize,
    pub length_penalty_alpha: f64,
    /// R: iterations of iterative beam search.
    pub iterations: usize,
    /// Hamming threshold below which a candidate counts as already explored.
    pub epsilon: f64,
    pub mode: IterMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam_width: 5,
            max_candidates: 15,
            max_length: 20,
            block_ngram: 3,
            length_penalty_alpha: 0.6,
            iterations: 15,
            epsilon: 1.0,
            mode: IterMode::Parallel,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_owned()));
        if self.beam_width < 1 {
            return bad("beam_width must be at least 1");
        }
        if self.max_candidates < 1 {
            return bad("max_candidates must be at least 1");
        }
        if self.max_length < 1 {
            return bad("max_length must be at least 1");
        }
        if !(self.length_penalty_alpha >= 0.0 && self.length_penalty_alpha.is_finite()) {
            return bad("length_penalty_alpha must be a finite value >= 0");
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, SearchError> {
        let cfg: SearchConfig =
            toml::from_str(text).map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }
}
