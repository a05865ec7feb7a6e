//! Add-α smoothed n-gram model with stupid back-off.
//!
//! Scores are computed from the longest context seen in training. For a
//! context `c` of length `k ≥ 1` with count `N(c) > 0`:
//!
//! ```text
//! S(w | c) = N(c, w) / N(c)           if N(c, w) > 0
//!          = 0.4 · S(w | c[1..])      otherwise
//! ```
//!
//! and at the empty context `S(w) = (N(w) + α) / (N + α·|E|)` where `E` is the
//! set of emittable tokens. The scores are renormalized over the vocabulary,
//! so every conditional is a proper distribution. Control tokens get zero
//! probability.
//!
//! # Serialized format
//!
//! JSON object, all collections sorted so the output is canonical:
//!
//! ```text
//! { "format": "dialsearch-ngram", "version": 1,
//!   "config": { "order", "alpha", "history_window", "max_prefix_len" },
//!   "vocab": { "tokens": [...], "control": [...] },
//!   "levels": [ [ { "context": [ids], "next": [[id, count], ...] }, ... ], ... ] }
//! ```
//!
//! `levels[k]` holds the contexts of length `k`.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{
    tokenize, Context, Conversation, DistributionProvider, LmError, LogProbVector, TokenId,
    Vocabulary,
};

pub const BACKOFF_FACTOR: f64 = 0.4;
pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT_NAME: &str = "dialsearch-ngram";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NGramConfig {
    pub order: usize,
    pub alpha: f64,
    /// Number of most recent turns kept when the context is flattened.
    pub history_window: usize,
    pub max_prefix_len: usize,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: 4,
            alpha: 0.1,
            history_window: 2,
            max_prefix_len: 256,
        }
    }
}

impl NGramConfig {
    pub fn validate(&self) -> Result<(), LmError> {
        if self.order < 1 {
            return Err(LmError::InvalidConfig("order must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(LmError::InvalidConfig("alpha must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: HashMap<TokenId, u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NGramLm {
    config: NGramConfig,
    vocab: Vocabulary,
    /// `levels[k]` maps contexts of length `k` to next-token counts.
    levels: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
    unigram: UnigramCache,
}

/// Smoothed unigram log-scores, computed on first use. Derived data, so it
/// never takes part in equality.
#[derive(Clone, Debug, Default)]
struct UnigramCache(OnceLock<Vec<f64>>);

impl PartialEq for UnigramCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl NGramLm {
    /// An untrained model; every conditional is uniform over emittable tokens.
    pub fn new(vocab: Vocabulary, config: NGramConfig) -> Result<Self, LmError> {
        config.validate()?;
        Ok(NGramLm {
            levels: vec![HashMap::new(); config.order],
            unigram: UnigramCache::default(),
            config,
            vocab,
        })
    }

    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    /// Counts every target token against each of its preceding contexts of
    /// length `0..order`. `stream` is the conditioning token stream that
    /// precedes the first target.
    pub fn observe(&mut self, stream: &[TokenId], targets: &[TokenId]) -> Result<(), LmError> {
        self.vocab.validate(stream)?;
        self.vocab.validate(targets)?;
        self.unigram = UnigramCache::default();
        let mut history = stream.to_vec();
        for &target in targets {
            for (k, level) in self.levels.iter_mut().enumerate() {
                if history.len() < k {
                    break;
                }
                let ctx = history[history.len() - k..].to_vec();
                let entry = level.entry(ctx).or_default();
                entry.total += 1;
                *entry.next.entry(target).or_default() += 1;
            }
            history.push(target);
        }
        Ok(())
    }

    /// Training count of `next` after `context` (`context.len() < order`).
    pub fn count(&self, context: &[TokenId], next: TokenId) -> u64 {
        self.levels
            .get(context.len())
            .and_then(|l| l.get(context))
            .and_then(|c| c.next.get(&next))
            .copied()
            .unwrap_or(0)
    }

    pub fn context_count(&self, context: &[TokenId]) -> u64 {
        self.levels
            .get(context.len())
            .and_then(|l| l.get(context))
            .map_or(0, |c| c.total)
    }

    fn stream_tail(&self, ctx: &Context, prefix: &[TokenId]) -> Vec<TokenId> {
        let keep = self.config.order - 1;
        let mut stream = ctx.flatten(&self.vocab, self.config.history_window);
        stream.extend_from_slice(prefix);
        let start = stream.len().saturating_sub(keep);
        stream.split_off(start)
    }

    /// `ln S(w)` at the empty context for every id; control tokens get `-inf`.
    fn unigram_scores(&self) -> &[f64] {
        self.unigram.0.get_or_init(|| {
            let vocab = &self.vocab;
            let alpha = self.config.alpha;
            let unigram = self.levels[0].get(&Vec::new());
            let total = unigram.map_or(0, |c| c.total) as f64;
            let log_denom = (total + alpha * vocab.emittable_count() as f64).ln();
            vocab
                .ids()
                .map(|id| {
                    if !vocab.is_emittable(id) {
                        return f64::NEG_INFINITY;
                    }
                    let c = unigram.and_then(|u| u.next.get(&id)).copied().unwrap_or(0);
                    (c as f64 + alpha).ln() - log_denom
                })
                .collect()
        })
    }

    pub fn to_json(&self) -> Result<String, LmError> {
        serde_json::to_string(&ModelFile::from(self)).map_err(|e| LmError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, LmError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| LmError::Format(e.to_string()))?;
        Self::try_from(file)
    }

    /// Tokenizes text against this model's vocabulary (unknown words become `<unk>`).
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        tokenize(text)
            .iter()
            .map(|t| self.vocab.id_or_unk(t))
            .collect()
    }
}

impl DistributionProvider for NGramLm {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn max_prefix_len(&self) -> usize {
        self.config.max_prefix_len
    }

    fn distribution(&self, ctx: &Context, prefix: &[TokenId]) -> Result<LogProbVector, LmError> {
        let mut weights = self.unigram_scores().to_vec();

        let tail = self.stream_tail(ctx, prefix);
        let log_backoff = BACKOFF_FACTOR.ln();
        for k in 1..self.config.order {
            if tail.len() < k {
                break;
            }
            let Some(counts) = self.levels[k].get(&tail[tail.len() - k..]) else {
                break;
            };
            for w in weights.iter_mut() {
                *w += log_backoff;
            }
            let log_total = (counts.total as f64).ln();
            for (&id, &c) in &counts.next {
                weights[id.index()] = (c as f64).ln() - log_total;
            }
        }
        Ok(LogProbVector::normalize(weights))
    }
}

/// Trains an n-gram model on a dialogue corpus.
///
/// Each utterance is counted with `<eos>` appended, conditioned on the
/// flattened persona-and-history stream that precedes it.
pub fn train_ngram(corpus: &[Conversation], config: NGramConfig) -> Result<NGramLm, LmError> {
    config.validate()?;
    if corpus.iter().all(|c| c.turns.is_empty()) {
        return Err(LmError::EmptyCorpus);
    }
    let mut vocab = Vocabulary::for_dialogue();
    for conv in corpus {
        for line in conv.persona.iter().chain(conv.turns.iter().map(|(_, t)| t)) {
            for tok in tokenize(line) {
                vocab.add(&tok);
            }
        }
    }
    let mut model = NGramLm::new(vocab, config)?;
    for conv in corpus {
        let persona = conv.persona.iter().map(|l| model.encode(l)).collect();
        let mut ctx = Context::with_persona(persona);
        for (_, text) in &conv.turns {
            let mut utt = model.encode(text);
            let stream = ctx.flatten(&model.vocab, model.config.history_window);
            utt.push(Vocabulary::EOS);
            model.observe(&stream, &utt)?;
            utt.pop();
            ctx.push(utt);
        }
    }
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: NGramConfig,
    vocab: Vocabulary,
    levels: Vec<Vec<ContextEntry>>,
}

#[derive(Serialize, Deserialize)]
struct ContextEntry {
    context: Vec<TokenId>,
    next: Vec<(TokenId, u64)>,
}

impl From<&NGramLm> for ModelFile {
    fn from(m: &NGramLm) -> Self {
        let levels = m
            .levels
            .iter()
            .map(|level| {
                let sorted: BTreeMap<_, _> = level.iter().collect();
                sorted
                    .into_iter()
                    .map(|(ctx, counts)| {
                        let next: BTreeMap<_, _> = counts.next.iter().map(|(&t, &c)| (t, c)).collect();
                        ContextEntry {
                            context: ctx.clone(),
                            next: next.into_iter().collect(),
                        }
                    })
                    .collect()
            })
            .collect();
        ModelFile {
            format: MODEL_FORMAT_NAME.into(),
            version: MODEL_FORMAT_VERSION,
            config: m.config.clone(),
            vocab: m.vocab.clone(),
            levels,
        }
    }
}

impl TryFrom<ModelFile> for NGramLm {
    type Error = LmError;

    fn try_from(file: ModelFile) -> Result<Self, LmError> {
        if file.format != MODEL_FORMAT_NAME || file.version != MODEL_FORMAT_VERSION {
            return Err(LmError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let mut model = NGramLm::new(file.vocab, file.config)?;
        if file.levels.len() != model.config.order {
            return Err(LmError::Format("level count does not match order".into()));
        }
        for (k, entries) in file.levels.into_iter().enumerate() {
            for entry in entries {
                if entry.context.len() != k {
                    return Err(LmError::Format(format!("context of wrong length at level {k}")));
                }
                model.vocab.validate(&entry.context)?;
                let mut counts = ContextCounts::default();
                for (tok, c) in entry.next {
                    if !model.vocab.contains(tok) {
                        return Err(LmError::UnknownToken(tok));
                    }
                    counts.total += c;
                    counts.next.insert(tok, c);
                }
                model.levels[k].insert(entry.context, counts);
            }
        }
        Ok(model)
    }
}
