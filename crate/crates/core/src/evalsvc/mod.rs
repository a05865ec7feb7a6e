//! The human evaluation protocol: persona-conditioned chat sessions with a
//! randomly assigned strategy, the post-conversation questionnaire, JSONL
//! transcripts, and model self-play for desk-scale runs.

mod persona;
mod questionnaire;
mod selfplay;
mod session;
mod transcript;

use thiserror::Error;

pub use persona::{PersonaPair, PersonaPool, PERSONA_LINES};
pub use questionnaire::{
    Question, Questionnaire, BAD_PAIRS_PROMPT, GOOD_PAIRS_PROMPT, OVERALL_PROMPT, OVERALL_SCALE,
};
pub use selfplay::{opening_turn, self_play, OPENERS, OPENING_QUESTIONS};
pub use session::{
    AnnotationRecord, EvalService, MessageView, Reply, ServiceConfig, Session, SessionState,
    SessionView,
};
pub use transcript::{
    binary_observations, generate_turn, human_turn, metrics_inputs, parse_jsonl, read_jsonl,
    read_transcripts, star_observations, write_jsonl, Annotation, CandidateRecord, Generation,
    Mode, PairFlag, TranscriptRecord, TranscriptStore, TurnRecord, TRANSCRIPT_FORMAT,
    TRANSCRIPT_VERSION,
};

use crate::calibration::CalibrationError;
use crate::lm::LmError;
use crate::search::{SearchError, Strategy};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error("session {session} is {state:?}")]
    State { session: String, state: SessionState },
    #[error("{0}")]
    Protocol(String),
    #[error("{0}")]
    Validation(String),
    #[error("annotator {annotator} has no sessions left{}", strategy.map(|s| format!(" for {s}")).unwrap_or_default())]
    Quota {
        annotator: String,
        strategy: Option<Strategy>,
    },
    #[error("persona pool: {0}")]
    Personas(String),
    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
    #[error("replaying turn {turn} gave a different reply")]
    ReplayMismatch { turn: usize },
    #[error(transparent)]
    Model(#[from] LmError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
