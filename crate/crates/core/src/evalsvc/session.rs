use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transcript::{generate_turn, human_turn, Annotation, Mode, TranscriptStore, TurnRecord};
use super::{EvalError, PersonaPair, PersonaPool, TranscriptRecord, OVERALL_SCALE, TRANSCRIPT_FORMAT, TRANSCRIPT_VERSION};
use crate::lm::{DistributionProvider, Speaker};
use crate::search::{SearchConfig, Strategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub seed: u64,
    /// Sessions one annotator may open per strategy.
    pub sessions_per_strategy: usize,
    /// `min_turns` is drawn uniformly from this list.
    pub min_turn_choices: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub search: SearchConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            seed: 0,
            sessions_per_strategy: 6,
            min_turn_choices: vec![5, 6],
            strategies: Strategy::ALL.to_vec(),
            search: SearchConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.min_turn_choices.is_empty() || self.min_turn_choices.contains(&0) {
            return Err(EvalError::Validation("min_turn_choices must be nonempty and positive".into()));
        }
        if self.strategies.is_empty() {
            return Err(EvalError::Validation("at least one strategy is required".into()));
        }
        self.search.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Chatting,
    AwaitingScores,
    Closed,
}

/// What the annotator's client may see: no strategy and no candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub annotator: String,
    /// The annotator's own persona.
    pub persona: Vec<String>,
    pub min_turns: usize,
    pub pairs: usize,
    pub state: SessionState,
    pub messages: Vec<MessageView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageView {
    pub from: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub text: String,
    pub pairs: usize,
    pub state: SessionState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator: String,
    pub overall: u8,
    pub good_pairs: Vec<bool>,
    pub bad_pairs: Vec<bool>,
}

/// One conversation between an annotator (speaker `a`) and the model
/// (speaker `b`).
#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub annotator: String,
    pub strategy: Strategy,
    pub personas: PersonaPair,
    pub min_turns: usize,
    pub turns: Vec<TurnRecord>,
    pub state: SessionState,
}

impl Session {
    pub fn pairs(&self) -> usize {
        self.turns.iter().filter(|t| t.generation.is_some()).count()
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            annotator: self.annotator.clone(),
            persona: self.personas.a.clone(),
            min_turns: self.min_turns,
            pairs: self.pairs(),
            state: self.state,
            messages: self
                .turns
                .iter()
                .map(|t| MessageView {
                    from: match t.speaker {
                        Speaker::A => "you".into(),
                        Speaker::B => "partner".into(),
                    },
                    text: t.text.clone(),
                })
                .collect(),
        }
    }
}

struct Registry {
    rng: ChaCha8Rng,
    next_id: u64,
    sessions: HashMap<String, Arc<Mutex<Session>>>,
    /// (annotator, strategy) -> sessions opened
    opened: HashMap<(String, Strategy), usize>,
}

/// Session bookkeeping for the human evaluation protocol.
///
/// Session creation draws from one seeded generator, so a fixed seed and a
/// fixed order of calls give the same assignments. Each session has its own
/// lock; decoding for one session does not block the others.
pub struct EvalService<M: ?Sized> {
    model: Arc<M>,
    personas: PersonaPool,
    config: ServiceConfig,
    store: TranscriptStore,
    registry: Mutex<Registry>,
}

impl<M: DistributionProvider + ?Sized> EvalService<M> {
    pub fn new(
        model: Arc<M>,
        personas: PersonaPool,
        config: ServiceConfig,
        store: TranscriptStore,
    ) -> Result<Self, EvalError> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(EvalService {
            model,
            personas,
            config,
            store,
            registry: Mutex::new(Registry {
                rng,
                next_id: 1,
                sessions: HashMap::new(),
                opened: HashMap::new(),
            }),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn store(&self) -> &TranscriptStore {
        &self.store
    }

    fn registry(&self) -> std::sync::MutexGuard<'_, Registry> {
        self.registry.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, EvalError> {
        self.registry()
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| EvalError::NotFound(id.to_string()))
    }

    /// Opens a session with a random strategy among those the annotator has
    /// not used up, or with `force` if given.
    pub fn create_session(&self, annotator: &str, force: Option<Strategy>) -> Result<SessionView, EvalError> {
        let annotator = annotator.trim();
        if annotator.is_empty() {
            return Err(EvalError::Validation("annotator id is empty".into()));
        }
        let cap = self.config.sessions_per_strategy;
        let mut reg = self.registry();
        let used = |reg: &Registry, s: Strategy| {
            reg.opened
                .get(&(annotator.to_string(), s))
                .copied()
                .unwrap_or(0)
        };
        let strategy = match force {
            Some(s) => {
                if used(&reg, s) >= cap {
                    return Err(EvalError::Quota {
                        annotator: annotator.to_string(),
                        strategy: Some(s),
                    });
                }
                s
            }
            None => {
                let open: Vec<Strategy> = self
                    .config
                    .strategies
                    .iter()
                    .copied()
                    .filter(|&s| used(&reg, s) < cap)
                    .collect();
                *open.choose(&mut reg.rng).ok_or_else(|| EvalError::Quota {
                    annotator: annotator.to_string(),
                    strategy: None,
                })?
            }
        };
        let personas = self.personas.draw_pair(&mut reg.rng);
        let min_turns = *self
            .config
            .min_turn_choices
            .choose(&mut reg.rng)
            .expect("validated nonempty");
        let id = format!("s{:05}", reg.next_id);
        reg.next_id += 1;
        *reg.opened.entry((annotator.to_string(), strategy)).or_default() += 1;
        let session = Session {
            id: id.clone(),
            annotator: annotator.to_string(),
            strategy,
            personas,
            min_turns,
            turns: Vec::new(),
            state: SessionState::Chatting,
        };
        let view = session.view();
        reg.sessions.insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn get_session(&self, id: &str) -> Result<SessionView, EvalError> {
        let s = self.session(id)?;
        let s = s.lock().unwrap_or_else(|e| e.into_inner());
        Ok(s.view())
    }

    /// Strategy and full turn records, for tests and operators.
    pub fn inspect(&self, id: &str) -> Result<Session, EvalError> {
        let s = self.session(id)?;
        let s = s.lock().unwrap_or_else(|e| e.into_inner());
        Ok(s.clone())
    }

    /// Adds the annotator's message and the model's reply. After `min_turns`
    /// pairs the session waits for scores and takes no more messages.
    pub fn post_message(&self, id: &str, text: &str) -> Result<Reply, EvalError> {
        let s = self.session(id)?;
        let mut s = s.lock().unwrap_or_else(|e| e.into_inner());
        match s.state {
            SessionState::Chatting => {}
            state => return Err(EvalError::State { session: id.to_string(), state }),
        }
        if text.trim().is_empty() {
            return Err(EvalError::Validation("message is empty".into()));
        }
        let user = human_turn(Speaker::A, text);
        if user.tokens.is_empty() {
            return Err(EvalError::Validation("message has no tokens".into()));
        }
        let mut history = s.turns.clone();
        history.push(user);
        let reply = generate_turn(
            self.model.as_ref(),
            &s.personas.b,
            &history,
            s.strategy,
            &self.config.search,
        )?;
        let text = reply.text.clone();
        history.push(reply);
        s.turns = history;
        if s.pairs() >= s.min_turns {
            s.state = SessionState::AwaitingScores;
        }
        Ok(Reply {
            text,
            pairs: s.pairs(),
            state: s.state,
        })
    }

    /// Validates the answers, appends the transcript row and closes the
    /// session.
    pub fn submit_annotation(&self, id: &str, ann: &AnnotationRecord) -> Result<TranscriptRecord, EvalError> {
        let s = self.session(id)?;
        let mut s = s.lock().unwrap_or_else(|e| e.into_inner());
        match s.state {
            SessionState::AwaitingScores => {}
            SessionState::Chatting => {
                return Err(EvalError::Protocol(format!(
                    "session {id} has {} of {} pairs; scores are accepted after the last pair",
                    s.pairs(),
                    s.min_turns
                )))
            }
            state => return Err(EvalError::State { session: id.to_string(), state }),
        }
        if ann.annotator != s.annotator {
            return Err(EvalError::Validation(format!(
                "session {id} belongs to another annotator"
            )));
        }
        if !OVERALL_SCALE.contains(&ann.overall) {
            return Err(EvalError::Validation(format!(
                "overall score must be one of 1, 2, 3, 4; got {}",
                ann.overall
            )));
        }
        let pairs = s.pairs();
        for (name, flags) in [("good_pairs", &ann.good_pairs), ("bad_pairs", &ann.bad_pairs)] {
            if flags.len() != pairs {
                return Err(EvalError::Validation(format!(
                    "{name} has {} flags for {pairs} pairs",
                    flags.len()
                )));
            }
        }
        let record = TranscriptRecord {
            format: TRANSCRIPT_FORMAT.to_string(),
            version: TRANSCRIPT_VERSION,
            session_id: s.id.clone(),
            mode: Mode::Human,
            annotator: Some(s.annotator.clone()),
            strategy: s.strategy,
            personas: s.personas.clone(),
            min_turns: s.min_turns,
            search: self.config.search.clone(),
            turns: s.turns.clone(),
            annotation: Some(Annotation {
                overall: ann.overall,
                good_pairs: ann.good_pairs.clone(),
                bad_pairs: ann.bad_pairs.clone(),
            }),
        };
        self.store.append(&record)?;
        s.state = SessionState::Closed;
        Ok(record)
    }

    pub fn transcripts(&self) -> Result<Vec<TranscriptRecord>, EvalError> {
        self.store.read_all()
    }
}
