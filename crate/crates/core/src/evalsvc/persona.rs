use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::lm::parse_corpus;

pub const PERSONA_LINES: std::ops::RangeInclusive<usize> = 4..=5;

/// Persona descriptions, one per speaker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaPair {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersonaPool {
    personas: Vec<Vec<String>>,
}

impl PersonaPool {
    /// Parses blocks of `persona:` lines (the corpus format without turns).
    /// Every persona needs 4 or 5 lines, and the pool at least two personas.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let blocks = parse_corpus(text).map_err(|e| EvalError::Personas(e.to_string()))?;
        let mut personas = Vec::new();
        for (i, b) in blocks.into_iter().enumerate() {
            if !b.turns.is_empty() {
                return Err(EvalError::Personas(format!("persona {} has dialogue turns", i + 1)));
            }
            if !PERSONA_LINES.contains(&b.persona.len()) {
                return Err(EvalError::Personas(format!(
                    "persona {} has {} lines, expected 4 or 5",
                    i + 1,
                    b.persona.len()
                )));
            }
            personas.push(b.persona);
        }
        if personas.len() < 2 {
            return Err(EvalError::Personas("need at least two personas".into()));
        }
        Ok(PersonaPool { personas })
    }

    pub fn len(&self) -> usize {
        self.personas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.personas.is_empty()
    }

    pub fn get(&self, i: usize) -> &[String] {
        &self.personas[i]
    }

    /// Two distinct personas drawn uniformly.
    pub fn draw_pair<R: Rng>(&self, rng: &mut R) -> PersonaPair {
        let idx = sample(rng, self.personas.len(), 2);
        PersonaPair {
            a: self.personas[idx.index(0)].clone(),
            b: self.personas[idx.index(1)].clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const POOL: &str = "persona: i like tea .\npersona: i have a cat .\npersona: i run .\npersona: i read .\n\n\
                        persona: i am tall .\npersona: i fish .\npersona: i sing .\npersona: i cook .\npersona: i swim .\n";

    #[test]
    fn parses_and_draws_distinct_pairs() {
        let pool = PersonaPool::parse(POOL).unwrap();
        assert_eq!(pool.len(), 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = pool.draw_pair(&mut rng);
            assert_ne!(p.a, p.b);
        }
    }

    #[test]
    fn rejects_short_personas_and_turns() {
        assert!(PersonaPool::parse("persona: a\npersona: b\n\npersona: c\n").is_err());
        let with_turn = format!("{POOL}\npersona: x\npersona: y\npersona: z\npersona: w\na: hi\n");
        assert!(PersonaPool::parse(&with_turn).is_err());
    }
}
