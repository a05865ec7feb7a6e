//! JSONL transcript rows and the conversions that feed metrics and
//! calibration.
//!
//! One row per conversation:
//!
//! | field | meaning |
//! |---|---|
//! | `format`, `version` | `"dialsearch-transcript"`, 1 |
//! | `session_id` | unique per file |
//! | `mode` | `human` (speaker `a` is the annotator) or `self_play` |
//! | `annotator` | annotator id, `null` for self-play |
//! | `strategy` | `greedy`, `beam` or `iter-beam` |
//! | `personas` | `{a: [...], b: [...]}` persona lines per speaker |
//! | `min_turns` | pairs required before scoring (0 for self-play) |
//! | `search` | the search configuration used for every generated turn |
//! | `turns[]` | `{speaker, text, tokens, generation}`; `generation` is `null` for human turns |
//! | `turns[].generation` | `{candidates: [{tokens, logp, score, iteration, forced}], selected, selected_logp}` |
//! | `annotation` | `{overall, good_pairs, bad_pairs}` or `null` |
//!
//! Token lists never contain `<eos>`. Candidate sets are post-hoc metadata;
//! annotators only ever see the selected reply.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{EvalError, PersonaPair};
use crate::calibration::{BinaryObservations, StarObservations};
use crate::lm::{tokenize, Context, DistributionProvider, Speaker, TokenId, Vocabulary};
use crate::metrics::{ConversationMetricsInput, TurnMetrics};
use crate::search::{decode, SearchConfig, Strategy};

pub const TRANSCRIPT_FORMAT: &str = "dialsearch-transcript";
pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Human,
    SelfPlay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub tokens: Vec<String>,
    pub logp: f64,
    /// Length-penalized selection score.
    pub score: f64,
    pub iteration: usize,
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub candidates: Vec<CandidateRecord>,
    pub selected: usize,
    pub selected_logp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub speaker: Speaker,
    pub text: String,
    pub tokens: Vec<String>,
    pub generation: Option<Generation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub overall: u8,
    pub good_pairs: Vec<bool>,
    pub bad_pairs: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub format: String,
    pub version: u32,
    pub session_id: String,
    pub mode: Mode,
    pub annotator: Option<String>,
    pub strategy: Strategy,
    pub personas: PersonaPair,
    pub min_turns: usize,
    pub search: SearchConfig,
    pub turns: Vec<TurnRecord>,
    pub annotation: Option<Annotation>,
}

/// Which per-pair flag to calibrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFlag {
    Good,
    Bad,
}

pub(crate) fn encode(vocab: &Vocabulary, tokens: &[String]) -> Vec<TokenId> {
    tokens.iter().map(|t| vocab.id_or_unk(t)).collect()
}

fn persona_ids(vocab: &Vocabulary, lines: &[String]) -> Vec<Vec<TokenId>> {
    lines.iter().map(|l| encode(vocab, &tokenize(l))).collect()
}

/// A turn typed by a person.
pub fn human_turn(speaker: Speaker, text: &str) -> TurnRecord {
    TurnRecord {
        speaker,
        text: text.trim().to_string(),
        tokens: tokenize(text),
        generation: None,
    }
}

/// Runs `strategy` for the next speaker after `history`, conditioned on that
/// speaker's persona.
pub fn generate_turn<M: DistributionProvider + ?Sized>(
    model: &M,
    persona: &[String],
    history: &[TurnRecord],
    strategy: Strategy,
    cfg: &SearchConfig,
) -> Result<TurnRecord, EvalError> {
    let vocab = model.vocab();
    let turns = history
        .iter()
        .map(|t| (t.speaker, encode(vocab, &t.tokens)))
        .collect();
    let ctx = Context::new(persona_ids(vocab, persona), turns)?;
    let speaker = ctx.next_speaker();
    let decoded = decode(model, &ctx, strategy, cfg)?;
    let words = |ids: &[TokenId]| -> Vec<String> {
        ids.iter()
            .filter(|&&t| t != Vocabulary::EOS)
            .map(|&t| vocab.token(t).unwrap_or("<unk>").to_string())
            .collect()
    };
    let candidates: Vec<CandidateRecord> = decoded
        .candidates
        .iter()
        .map(|c| CandidateRecord {
            tokens: words(&c.hypothesis.tokens),
            logp: c.hypothesis.score,
            score: c.selection_score,
            iteration: c.iteration,
            forced: c.forced,
        })
        .collect();
    let selected = decoded.selected();
    Ok(TurnRecord {
        speaker,
        text: vocab.detokenize(&selected.hypothesis.tokens),
        tokens: words(&selected.hypothesis.tokens),
        generation: Some(Generation {
            selected_logp: selected.hypothesis.score,
            selected: decoded.selected,
            candidates,
        }),
    })
}

impl TranscriptRecord {
    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn persona_of(&self, speaker: Speaker) -> &[String] {
        match speaker {
            Speaker::A => &self.personas.a,
            Speaker::B => &self.personas.b,
        }
    }

    /// Number of completed (human, model) pairs, or generated turns for
    /// self-play.
    pub fn pairs(&self) -> usize {
        self.turns.iter().filter(|t| t.generation.is_some()).count()
    }

    /// Generated turns only.
    pub fn metrics_input(&self) -> ConversationMetricsInput {
        ConversationMetricsInput {
            turns: self
                .turns
                .iter()
                .filter_map(|t| {
                    let g = t.generation.as_ref()?;
                    Some(TurnMetrics {
                        selected: t.tokens.clone(),
                        candidates: g.candidates.iter().map(|c| c.tokens.clone()).collect(),
                        selected_logp: g.selected_logp,
                    })
                })
                .collect(),
        }
    }

    /// Re-runs every generated turn on its recorded context and reports the
    /// first turn whose output differs from the record.
    pub fn replay<M: DistributionProvider + ?Sized>(&self, model: &M) -> Result<(), EvalError> {
        for (i, turn) in self.turns.iter().enumerate() {
            if turn.generation.is_none() {
                continue;
            }
            let again = generate_turn(
                model,
                self.persona_of(turn.speaker),
                &self.turns[..i],
                self.strategy,
                &self.search,
            )?;
            if &again != turn {
                return Err(EvalError::ReplayMismatch { turn: i });
            }
        }
        Ok(())
    }
}

/// Metrics input grouped by strategy.
pub fn metrics_inputs(records: &[TranscriptRecord]) -> BTreeMap<String, Vec<ConversationMetricsInput>> {
    let mut out: BTreeMap<String, Vec<ConversationMetricsInput>> = BTreeMap::new();
    for r in records {
        out.entry(r.strategy.to_string()).or_default().push(r.metrics_input());
    }
    out
}

/// Overall scores of annotated records, with strategies as models.
pub fn star_observations(records: &[TranscriptRecord]) -> Result<StarObservations, EvalError> {
    let rows: Vec<(String, String, f64)> = records
        .iter()
        .filter_map(|r| {
            let a = r.annotation.as_ref()?;
            Some((r.strategy.to_string(), r.annotator.clone()?, a.overall as f64))
        })
        .collect();
    if rows.is_empty() {
        return Err(EvalError::Validation("no annotated transcripts".into()));
    }
    Ok(StarObservations::from_labeled(&rows)?)
}

/// Per-pair flags of annotated records; the pair index is the turn index.
pub fn binary_observations(records: &[TranscriptRecord], flag: PairFlag) -> Result<BinaryObservations, EvalError> {
    let mut rows = Vec::new();
    for r in records {
        let (Some(a), Some(who)) = (r.annotation.as_ref(), r.annotator.as_ref()) else {
            continue;
        };
        let flags = match flag {
            PairFlag::Good => &a.good_pairs,
            PairFlag::Bad => &a.bad_pairs,
        };
        for (k, &f) in flags.iter().enumerate() {
            rows.push((r.strategy.to_string(), who.clone(), k, f));
        }
    }
    if rows.is_empty() {
        return Err(EvalError::Validation("no annotated transcripts".into()));
    }
    Ok(BinaryObservations::from_labeled(&rows)?)
}

/// Appends rows to a JSONL file. Each row is written with a single
/// `write_all` on an append-mode handle while holding the store lock, so rows
/// never interleave.
#[derive(Debug)]
pub struct TranscriptStore {
    path: PathBuf,
    lock: Mutex<()>,
}

impl TranscriptStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        TranscriptStore {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &TranscriptRecord) -> Result<(), EvalError> {
        let line = record.to_json_line();
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    /// Every stored row; a missing file reads as empty.
    pub fn read_all(&self) -> Result<Vec<TranscriptRecord>, EvalError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        read_jsonl(&self.path)
    }
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TranscriptRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: TranscriptRecord = serde_json::from_str(line).map_err(|e| EvalError::Transcript {
            line: i + 1,
            message: e.to_string(),
        })?;
        if r.format != TRANSCRIPT_FORMAT || r.version != TRANSCRIPT_VERSION {
            return Err(EvalError::Transcript {
                line: i + 1,
                message: format!("unsupported format {} v{}", r.format, r.version),
            });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TranscriptRecord>, EvalError> {
    parse_jsonl(&fs::read_to_string(path)?)
}

/// Reads a JSONL file, or every `*.jsonl` file of a directory in name order.
pub fn read_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>, EvalError> {
    if !path.is_dir() {
        return read_jsonl(path);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_jsonl(&f)?);
    }
    Ok(out)
}

/// Writes all rows at once through a temporary file and a rename.
pub fn write_jsonl(path: &Path, records: &[TranscriptRecord]) -> Result<(), EvalError> {
    let body: String = records.iter().map(TranscriptRecord::to_json_line).collect();
    let tmp = path.with_extension("jsonl.tmp");
    fs::write(&tmp, body)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
