use serde::{Deserialize, Serialize};

pub const OVERALL_PROMPT: &str = include_str!("../../assets/questionnaire/overall.txt");
pub const GOOD_PAIRS_PROMPT: &str = include_str!("../../assets/questionnaire/good_pairs.txt");
pub const BAD_PAIRS_PROMPT: &str = include_str!("../../assets/questionnaire/bad_pairs.txt");

/// Allowed overall scores.
pub const OVERALL_SCALE: [u8; 4] = [1, 2, 3, 4];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    /// Choices for single-choice questions; empty for per-pair selection.
    pub choices: Vec<u8>,
}

/// The post-conversation questions, in the order they are asked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub questions: Vec<Question>,
}

impl Default for Questionnaire {
    fn default() -> Self {
        let q = |id: &str, prompt: &str, choices: &[u8]| Question {
            id: id.to_string(),
            prompt: prompt.to_string(),
            choices: choices.to_vec(),
        };
        Questionnaire {
            questions: vec![
                q("overall", OVERALL_PROMPT, &OVERALL_SCALE),
                q("good_pairs", GOOD_PAIRS_PROMPT, &[]),
                q("bad_pairs", BAD_PAIRS_PROMPT, &[]),
            ],
        }
    }
}
