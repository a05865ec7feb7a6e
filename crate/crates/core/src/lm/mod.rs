//! Conditional next-token distributions.
//!
//! Every model implements [`DistributionProvider`], which maps a dialogue
//! [`Context`] and a response prefix to a normalized [`LogProbVector`] over the
//! vocabulary. Two models ship with the crate: [`NGramLm`], an add-α smoothed
//! n-gram model with stupid back-off that is trained from a dialogue corpus,
//! and [`TableLm`], an explicit lookup table used to build exact test fixtures.
//!
//! All arithmetic stays in the log domain.

mod context;
pub mod corpus;
mod ngram;
mod table;
mod vocab;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use context::{Context, Speaker};
pub use corpus::{parse_corpus, Conversation};
pub use ngram::{train_ngram, NGramConfig, NGramLm, BACKOFF_FACTOR, MODEL_FORMAT_VERSION};
pub use table::TableLm;
pub use vocab::{tokenize, TokenId, Vocabulary};

/// Tolerance on `log Σ exp(values)` for a vector to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("token id {0} is outside the vocabulary")]
    UnknownToken(TokenId),
    #[error("prefix length {len} exceeds the model maximum {max}")]
    PrefixTooLong { len: usize, max: usize },
    #[error("model has no entry for prefix {prefix:?}")]
    MissingEntry { prefix: Vec<TokenId> },
    #[error("response must be nonempty and end with <eos>")]
    Unterminated,
    #[error("log-probability vector is not normalized (log-sum-exp = {0})")]
    NotNormalized(f64),
    #[error("log-probability vector has length {got}, vocabulary has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("speaker tags in the history must alternate")]
    NonAlternatingHistory,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("malformed model file: {0}")]
    Format(String),
}

/// Numerically stable `log Σ exp(values)`; `-inf` for an empty or all `-inf`
/// input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// A normalized log-probability distribution over a vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LogProbVector(Vec<f64>);

impl TryFrom<Vec<f64>> for LogProbVector {
    type Error = LmError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<LogProbVector> for Vec<f64> {
    fn from(v: LogProbVector) -> Self {
        v.0
    }
}

impl LogProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self, LmError> {
        let lse = log_sum_exp(&values);
        if lse.is_nan() || lse.abs() > NORMALIZATION_TOLERANCE || values.iter().any(|&v| v > 1e-9 || v.is_nan()) {
            return Err(LmError::NotNormalized(lse));
        }
        Ok(LogProbVector(values))
    }

    /// Builds a vector from plain probabilities (zero maps to `-inf`).
    pub fn from_probs(probs: &[f64]) -> Result<Self, LmError> {
        Self::new(probs.iter().map(|p| p.ln()).collect())
    }

    /// Normalizes arbitrary log-weights; `-inf` weights stay `-inf`.
    pub(crate) fn normalize(mut weights: Vec<f64>) -> Self {
        let lse = log_sum_exp(&weights);
        for w in &mut weights {
            *w -= lse;
        }
        LogProbVector(weights)
    }

    pub fn get(&self, id: TokenId) -> f64 {
        self.0[id.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most likely token; ties go to the lowest id.
    pub fn argmax(&self) -> TokenId {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        TokenId(best as u32)
    }
}

/// The conditional model p(y_t | y_<t, context).
///
/// Implementations are immutable after construction and may be shared across
/// threads.
pub trait DistributionProvider: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    /// Distribution of the next response token. Inputs are already validated.
    fn distribution(&self, ctx: &Context, prefix: &[TokenId]) -> Result<LogProbVector, LmError>;

    /// Longest prefix the model accepts.
    fn max_prefix_len(&self) -> usize {
        1024
    }
}

/// Validates the inputs and returns the model's next-token distribution.
pub fn next_logprobs<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    prefix: &[TokenId],
) -> Result<LogProbVector, LmError> {
    let vocab = model.vocab();
    let max = model.max_prefix_len();
    if prefix.len() > max {
        return Err(LmError::PrefixTooLong {
            len: prefix.len(),
            max,
        });
    }
    vocab.validate(prefix)?;
    ctx.validate(vocab)?;
    let dist = model.distribution(ctx, prefix)?;
    if dist.len() != vocab.len() {
        return Err(LmError::WrongLength {
            got: dist.len(),
            expected: vocab.len(),
        });
    }
    Ok(dist)
}

/// Log-probability of a complete, `<eos>`-terminated response.
pub fn sequence_logprob<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    response: &[TokenId],
) -> Result<f64, LmError> {
    if response.last() != Some(&Vocabulary::EOS) {
        return Err(LmError::Unterminated);
    }
    let mut total = 0.0;
    for t in 0..response.len() {
        total += next_logprobs(model, ctx, &response[..t])?.get(response[t]);
    }
    Ok(total)
}
