use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// How pre-selection candidate sets are grouped before unique n-grams are
/// counted. Normalization is per conversation either way.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// All candidate sets of a conversation form one pool.
    #[default]
    Conversation,
    /// Unique n-grams are counted per turn and summed over the conversation.
    Turn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distinct {
    pub value: f64,
    /// Conversations that entered the mean.
    pub conversations: usize,
    /// Conversations without any tokens, left out of the mean.
    pub skipped: usize,
}

/// Mean over conversations of `|unique n-grams| / |tokens|`.
///
/// Each conversation is a list of sequences. N-grams never span two
/// sequences, and sequences shorter than `n` still count towards the token
/// total.
pub fn distinct_n<T: Hash + Eq>(conversations: &[Vec<Vec<T>>], n: usize) -> Result<Distinct, MetricsError> {
    grouped(
        conversations.iter().map(|c| vec![c.as_slice()]),
        n,
    )
}

/// Like [`distinct_n`], with conversations split into groups (turns) whose
/// unique n-gram counts are summed.
pub fn distinct_n_grouped<T: Hash + Eq>(
    conversations: &[Vec<Vec<Vec<T>>>],
    n: usize,
) -> Result<Distinct, MetricsError> {
    grouped(
        conversations
            .iter()
            .map(|c| c.iter().map(Vec::as_slice).collect()),
        n,
    )
}

fn grouped<'a, T, I>(conversations: I, n: usize) -> Result<Distinct, MetricsError>
where
    T: Hash + Eq + 'a,
    I: IntoIterator<Item = Vec<&'a [Vec<T>]>>,
{
    if n == 0 {
        return Err(MetricsError::InvalidN);
    }
    let mut sum = 0.0;
    let mut used = 0;
    let mut skipped = 0;
    for groups in conversations {
        let mut unique = 0usize;
        let mut tokens = 0usize;
        for group in groups {
            let mut seen: HashSet<&[T]> = HashSet::new();
            for seq in group {
                tokens += seq.len();
                if seq.len() >= n {
                    seen.extend(seq.windows(n));
                }
            }
            unique += seen.len();
        }
        if tokens == 0 {
            skipped += 1;
            continue;
        }
        sum += unique as f64 / tokens as f64;
        used += 1;
    }
    if used == 0 {
        return Err(MetricsError::NoTokens);
    }
    Ok(Distinct {
        value: sum / used as f64,
        conversations: used,
        skipped,
    })
}
