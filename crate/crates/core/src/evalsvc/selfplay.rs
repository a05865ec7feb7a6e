use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transcript::{generate_turn, human_turn, Mode};
use super::{EvalError, PersonaPool, TranscriptRecord, TRANSCRIPT_FORMAT, TRANSCRIPT_VERSION};
use crate::lm::{DistributionProvider, Speaker};
use crate::search::{SearchConfig, Strategy};

/// Greetings for speaker `a`'s first turn.
pub const OPENERS: [&str; 8] = [
    "hi , how are you today ?",
    "hello ! what do you do for fun ?",
    "hey there , how is your day going ?",
    "hi ! tell me about yourself .",
    "hello , what do you do for a living ?",
    "hi there ! do you have any hobbies ?",
    "hey , how was your weekend ?",
    "hello ! where are you from ?",
];

/// Questions that close speaker `a`'s first turn.
pub const OPENING_QUESTIONS: [&str; 6] = [
    "what do you do for work ?",
    "do you have any pets ?",
    "what do you like to do for fun ?",
    "what is your favorite food ?",
    "where do you live ?",
    "what kind of music do you like ?",
];

/// Speaker `a`'s first turn: a greeting, one line of `a`'s persona and a
/// question, all drawn from `rng`. The model generates everything after it.
pub fn opening_turn<R: Rng>(persona: &[String], rng: &mut R) -> String {
    let greeting = OPENERS.choose(rng).expect("nonempty");
    let question = OPENING_QUESTIONS.choose(rng).expect("nonempty");
    match persona.choose(rng) {
        Some(line) => format!("{greeting} {line} {question}"),
        None => format!("{greeting} {question}"),
    }
}

/// `n` conversations of `turns` utterances (the opener included) in which
/// the model plays both personas. Persona pairs and openers depend only on
/// `seed`, so runs with different strategies but the same seed start from the
/// same conversations.
pub fn self_play<M: DistributionProvider + ?Sized>(
    model: &M,
    personas: &PersonaPool,
    n: usize,
    strategy: Strategy,
    turns: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<Vec<TranscriptRecord>, EvalError> {
    if turns < 2 {
        return Err(EvalError::Validation("self-play needs at least two turns".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let pair = personas.draw_pair(&mut rng);
        let opener = opening_turn(&pair.a, &mut rng);
        let mut history = vec![human_turn(Speaker::A, &opener)];
        while history.len() < turns {
            let speaker = history.last().expect("nonempty").speaker.other();
            let persona = match speaker {
                Speaker::A => &pair.a,
                Speaker::B => &pair.b,
            };
            let turn = generate_turn(model, persona, &history, strategy, cfg)?;
            history.push(turn);
        }
        out.push(TranscriptRecord {
            format: TRANSCRIPT_FORMAT.to_string(),
            version: TRANSCRIPT_VERSION,
            session_id: format!("selfplay-{seed}-{c:04}"),
            mode: Mode::SelfPlay,
            annotator: None,
            strategy,
            personas: pair,
            min_turns: 0,
            search: cfg.clone(),
            turns: history,
            annotation: None,
        });
    }
    Ok(out)
}
