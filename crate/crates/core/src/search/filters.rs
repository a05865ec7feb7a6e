//! Candidate filters: repeated n-gram blocking and the Hamming dissimilarity
//! used to keep iterative beam search away from explored hypotheses.

use std::collections::HashSet;

use crate::lm::TokenId;

/// True iff some n-gram occurs at least twice in `tokens`.
pub fn blocks_ngram(tokens: &[TokenId], n: usize) -> bool {
    assert!(n >= 1, "n-gram size must be at least 1");
    if tokens.len() < n {
        return false;
    }
    let mut seen = HashSet::new();
    tokens.windows(n).any(|w| !seen.insert(w))
}

/// Hamming distance between equal-length sequences; `+inf` when the lengths
/// differ.
pub fn hamming_dissimilarity(a: &[TokenId], b: &[TokenId]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
}

/// Tokens that would be removed from the extensions of one parent.
#[derive(Debug, Default)]
pub(crate) struct Banned {
    pub all: bool,
    pub tokens: HashSet<TokenId>,
}

impl Banned {
    pub fn contains(&self, token: TokenId) -> bool {
        self.all || self.tokens.contains(&token)
    }
}

/// Adds every token whose extension of `parent` would repeat an n-gram.
/// Assumes `parent` itself has no repeated n-gram.
pub(crate) fn ban_repeating(parent: &[TokenId], n: usize, banned: &mut Banned) {
    if n == 0 || parent.len() + 1 < n {
        return;
    }
    let suffix = &parent[parent.len() + 1 - n..];
    // every earlier occurrence of the (n-1)-token suffix fixes one banned token
    for start in 0..parent.len() + 1 - n {
        if &parent[start..start + n - 1] == suffix {
            banned.tokens.insert(parent[start + n - 1]);
        }
    }
}

/// Adds the extensions of `parent` that fall within `epsilon` of an explored
/// hypothesis. `explored` holds sequences one token longer than `parent`.
///
/// For a candidate `parent ‖ v` and an explored `h`, the distance splits into
/// the prefix mismatch `d` plus one if `v` differs from `h`'s last token.
pub(crate) fn ban_explored<'a, I>(parent: &[TokenId], explored: I, epsilon: f64, banned: &mut Banned)
where
    I: IntoIterator<Item = &'a [TokenId]>,
{
    let t = parent.len();
    for h in explored {
        debug_assert_eq!(h.len(), t + 1);
        let d = hamming_dissimilarity(parent, &h[..t]);
        if d + 1.0 < epsilon {
            banned.all = true;
            return;
        }
        if d < epsilon {
            banned.tokens.insert(h[t]);
        }
    }
}
