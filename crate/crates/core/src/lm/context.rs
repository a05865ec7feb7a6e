use serde::{Deserialize, Serialize};

use super::{LmError, TokenId, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    A,
    B,
}

impl Speaker {
    pub fn other(self) -> Speaker {
        match self {
            Speaker::A => Speaker::B,
            Speaker::B => Speaker::A,
        }
    }
}

/// Conditioning information for one response: persona lines plus the
/// alternating turn history.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    persona_lines: Vec<Vec<TokenId>>,
    history: Vec<(Speaker, Vec<TokenId>)>,
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        persona_lines: Vec<Vec<TokenId>>,
        history: Vec<(Speaker, Vec<TokenId>)>,
    ) -> Result<Self, LmError> {
        if history.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(LmError::NonAlternatingHistory);
        }
        Ok(Context {
            persona_lines,
            history,
        })
    }

    pub fn with_persona(persona_lines: Vec<Vec<TokenId>>) -> Self {
        Context {
            persona_lines,
            history: Vec::new(),
        }
    }

    pub fn persona_lines(&self) -> &[Vec<TokenId>] {
        &self.persona_lines
    }

    pub fn history(&self) -> &[(Speaker, Vec<TokenId>)] {
        &self.history
    }

    /// Speaker of the response this context conditions; `A` opens.
    pub fn next_speaker(&self) -> Speaker {
        self.history.last().map_or(Speaker::A, |(s, _)| s.other())
    }

    /// Appends an utterance by the next speaker.
    pub fn push(&mut self, utterance: Vec<TokenId>) {
        let speaker = self.next_speaker();
        self.history.push((speaker, utterance));
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), LmError> {
        for line in &self.persona_lines {
            vocab.validate(line)?;
        }
        for (_, utt) in &self.history {
            vocab.validate(utt)?;
        }
        Ok(())
    }

    /// Flattens the context into one token stream: each persona line behind a
    /// persona sentinel, the last `history_window` turns behind speaker tags,
    /// and finally the tag of the speaker about to respond. Sentinels the
    /// vocabulary does not define are omitted.
    pub fn flatten(&self, vocab: &Vocabulary, history_window: usize) -> Vec<TokenId> {
        let mut out = Vec::new();
        let persona_mark = vocab.persona_mark();
        for line in &self.persona_lines {
            out.extend(persona_mark);
            out.extend_from_slice(line);
        }
        let skip = self.history.len().saturating_sub(history_window);
        for (speaker, utt) in &self.history[skip..] {
            out.extend(vocab.speaker_mark(*speaker));
            out.extend(utt.iter().copied().filter(|&t| t != Vocabulary::EOS));
        }
        out.extend(vocab.speaker_mark(self.next_speaker()));
        out
    }
}
