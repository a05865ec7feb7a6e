//! Plain-text dialogue corpus format.
//!
//! One conversation per block, blocks separated by blank lines:
//!
//! ```text
//! persona: i like to hike .
//! persona: my dog is called rex .
//! a: hi there !
//! b: hello , how are you ?
//! ```
//!
//! Persona lines come first, followed by turns that alternate between `a:` and
//! `b:` starting with `a:`. Lines beginning with `#` are comments. A block with
//! persona lines and no turns is valid; persona pool files use exactly that.

use serde::{Deserialize, Serialize};

use super::{LmError, Speaker};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub persona: Vec<String>,
    pub turns: Vec<(Speaker, String)>,
}

impl Conversation {
    fn is_empty(&self) -> bool {
        self.persona.is_empty() && self.turns.is_empty()
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Conversation>, LmError> {
    let mut out = Vec::new();
    let mut current = Conversation::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            continue;
        }
        let err = |message: &str| LmError::Corpus {
            line: line_no,
            message: message.to_owned(),
        };
        let (tag, body) = line
            .split_once(':')
            .ok_or_else(|| err("expected `persona:`, `a:` or `b:` prefix"))?;
        let body = body.trim().to_owned();
        match tag.trim() {
            "persona" => {
                if !current.turns.is_empty() {
                    return Err(err("persona line after the first turn"));
                }
                current.persona.push(body);
            }
            "a" | "b" => {
                let speaker = if tag.trim() == "a" { Speaker::A } else { Speaker::B };
                let expected = current.turns.last().map_or(Speaker::A, |(s, _)| s.other());
                if speaker != expected {
                    return Err(err("turns must alternate a/b starting with a"));
                }
                current.turns.push((speaker, body));
            }
            _ => return Err(err("unknown line tag")),
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}
