use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::lm::{TokenId, Vocabulary};

/// A partial or complete response with its cumulative log-probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    pub score: f64,
    pub finished: bool,
}

impl Hypothesis {
    pub fn root() -> Self {
        Hypothesis {
            tokens: Vec::new(),
            score: 0.0,
            finished: false,
        }
    }

    /// Appends `token` with its conditional log-probability.
    pub fn extend(&self, token: TokenId, logprob: f64) -> Self {
        debug_assert!(!self.finished, "finished hypotheses are never extended");
        let mut tokens = Vec::with_capacity(self.tokens.len() + 1);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(token);
        Hypothesis {
            tokens,
            score: self.score + logprob,
            finished: token == Vocabulary::EOS,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Divides a log-probability by `((5 + length) / 6)^alpha`.
pub fn length_penalized_score(logprob: f64, length: usize, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return logprob;
    }
    logprob / ((5.0 + length as f64) / 6.0).powf(alpha)
}

/// A finished hypothesis in a candidate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub hypothesis: Hypothesis,
    /// Length-penalized score used for final selection.
    pub selection_score: f64,
    /// Iteration that produced the candidate (always 0 for plain beam search).
    pub iteration: usize,
    /// True when `<eos>` was appended at the length limit.
    pub forced: bool,
}

impl Candidate {
    pub fn new(hypothesis: Hypothesis, alpha: f64, iteration: usize, forced: bool) -> Self {
        let selection_score = length_penalized_score(hypothesis.score, hypothesis.len(), alpha);
        Candidate {
            hypothesis,
            selection_score,
            iteration,
            forced,
        }
    }
}

/// Selection order: higher penalized score, then shorter, then
/// lexicographically smaller tokens.
pub(crate) fn selection_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.selection_score
        .total_cmp(&a.selection_score)
        .then_with(|| a.hypothesis.len().cmp(&b.hypothesis.len()))
        .then_with(|| a.hypothesis.tokens.cmp(&b.hypothesis.tokens))
}

/// The pool of finished responses a search returns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter()
    }

    /// Index of the candidate [`select_final`] picks.
    pub fn best_index(&self) -> Option<usize> {
        (0..self.candidates.len())
            .min_by(|&i, &j| selection_order(&self.candidates[i], &self.candidates[j]))
    }
}

/// Picks the candidate with the highest length-penalized score; ties go to the
/// shorter response, then to the lexicographically smaller token sequence.
pub fn select_final(cands: &CandidateSet) -> Result<&Candidate, SearchError> {
    cands
        .best_index()
        .map(|i| &cands.candidates[i])
        .ok_or(SearchError::EmptyCandidates)
}
