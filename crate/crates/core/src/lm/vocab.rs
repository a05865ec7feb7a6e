use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LmError;

/// Dense index into a [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub const EOS: &str = "<eos>";
pub const UNK: &str = "<unk>";
pub const PAD: &str = "<pad>";

/// Marks the start of a persona line in a flattened context.
pub const PERSONA_MARK: &str = "<persona>";
/// Speaker tags that precede each utterance in a flattened context.
pub const SPEAKER_A_MARK: &str = "<speaker_a>";
pub const SPEAKER_B_MARK: &str = "<speaker_b>";

/// Token ↔ id bijection with reserved end-of-sequence, unknown and padding
/// entries at ids 0, 1 and 2.
///
/// Control tokens (padding plus any context sentinels) are never produced by
/// a trained model: [`Vocabulary::is_emittable`] is false for them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    control: BTreeSet<TokenId>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    control: Vec<String>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = LmError;

    fn try_from(repr: VocabularyRepr) -> Result<Self, Self::Error> {
        if repr.tokens.len() < 3 || repr.tokens[..3] != [EOS, UNK, PAD] {
            return Err(LmError::Format(
                "vocabulary must start with <eos>, <unk>, <pad>".into(),
            ));
        }
        let mut vocab = Vocabulary::new();
        for tok in &repr.tokens[3..] {
            if vocab.index.contains_key(tok) {
                return Err(LmError::Format(format!("duplicate token {tok:?}")));
            }
            vocab.add(tok);
        }
        for tok in &repr.control {
            let id = vocab
                .id(tok)
                .ok_or_else(|| LmError::Format(format!("control token {tok:?} not in vocabulary")))?;
            vocab.control.insert(id);
        }
        Ok(vocab)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        let control = v.control.iter().map(|id| v.tokens[id.index()].clone()).collect();
        VocabularyRepr {
            tokens: v.tokens,
            control,
        }
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub const EOS: TokenId = TokenId(0);
    pub const UNK: TokenId = TokenId(1);
    pub const PAD: TokenId = TokenId(2);

    /// A vocabulary holding only the reserved tokens.
    pub fn new() -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
            control: BTreeSet::new(),
        };
        v.add(EOS);
        v.add(UNK);
        v.add(PAD);
        v.control.insert(Self::PAD);
        v
    }

    /// Reserved tokens plus the persona and speaker sentinels used when a
    /// dialogue context is flattened into a token stream.
    pub fn for_dialogue() -> Self {
        let mut v = Self::new();
        for mark in [PERSONA_MARK, SPEAKER_A_MARK, SPEAKER_B_MARK] {
            let id = v.add(mark);
            v.control.insert(id);
        }
        v
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Self::new();
        for t in tokens {
            v.add(t.as_ref());
        }
        v
    }

    /// Adds `token` if absent and returns its id.
    pub fn add(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = TokenId(self.tokens.len() as u32);
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Looks up `token`, mapping unseen words to `<unk>`.
    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(Self::UNK)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id.index()).map(String::as_str)
    }

    pub fn contains(&self, id: TokenId) -> bool {
        id.index() < self.tokens.len()
    }

    pub fn is_control(&self, id: TokenId) -> bool {
        self.control.contains(&id)
    }

    pub fn is_emittable(&self, id: TokenId) -> bool {
        self.contains(id) && !self.is_control(id)
    }

    pub fn emittable_count(&self) -> usize {
        self.tokens.len() - self.control.len()
    }

    pub fn persona_mark(&self) -> Option<TokenId> {
        self.id(PERSONA_MARK)
    }

    pub fn speaker_mark(&self, speaker: super::Speaker) -> Option<TokenId> {
        match speaker {
            super::Speaker::A => self.id(SPEAKER_A_MARK),
            super::Speaker::B => self.id(SPEAKER_B_MARK),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = TokenId> {
        (0..self.tokens.len() as u32).map(TokenId)
    }

    pub fn validate(&self, ids: &[TokenId]) -> Result<(), LmError> {
        match ids.iter().find(|id| !self.contains(**id)) {
            Some(&id) => Err(LmError::UnknownToken(id)),
            None => Ok(()),
        }
    }

    /// Renders ids as space-separated tokens, dropping `<eos>`.
    pub fn detokenize(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .filter(|&&id| id != Self::EOS)
            .map(|&id| self.token(id).unwrap_or(UNK))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Lowercases and splits text into word and punctuation tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
        } else if ch.is_ascii_punctuation() && ch != '\'' && ch != '-' {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            out.push(ch.to_string());
        } else {
            word.extend(ch.to_lowercase());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}
