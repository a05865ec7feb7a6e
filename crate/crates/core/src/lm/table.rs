use std::collections::HashMap;

use rand::Rng;

use super::{Context, DistributionProvider, LmError, LogProbVector, TokenId, Vocabulary};

/// An explicit table from (flattened context, prefix) to a distribution.
///
/// Lookups for prefixes that were never inserted fail with
/// [`LmError::MissingEntry`].
#[derive(Clone, Debug)]
pub struct TableLm {
    vocab: Vocabulary,
    entries: HashMap<(Vec<TokenId>, Vec<TokenId>), LogProbVector>,
}

impl TableLm {
    pub fn new(vocab: Vocabulary) -> Self {
        TableLm {
            vocab,
            entries: HashMap::new(),
        }
    }

    fn context_key(&self, ctx: &Context) -> Vec<TokenId> {
        ctx.flatten(&self.vocab, usize::MAX)
    }

    pub fn insert(
        &mut self,
        ctx: &Context,
        prefix: &[TokenId],
        dist: LogProbVector,
    ) -> Result<(), LmError> {
        if dist.len() != self.vocab.len() {
            return Err(LmError::WrongLength {
                got: dist.len(),
                expected: self.vocab.len(),
            });
        }
        self.vocab.validate(prefix)?;
        let key = (self.context_key(ctx), prefix.to_vec());
        self.entries.insert(key, dist);
        Ok(())
    }

    /// Convenience for fixtures that only use the empty context.
    pub fn with_entries<I>(vocab: Vocabulary, entries: I) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = (Vec<TokenId>, LogProbVector)>,
    {
        let mut table = TableLm::new(vocab);
        let ctx = Context::empty();
        for (prefix, dist) in entries {
            table.insert(&ctx, &prefix, dist)?;
        }
        Ok(table)
    }

    /// A table over the empty context with a random distribution for every
    /// prefix of at most `max_prefix_len` tokens. Emittable tokens get weights
    /// drawn uniformly from `[0.05, 1)`, then normalized; control tokens get
    /// zero. Prefixes never contain `<eos>`.
    pub fn random<R: Rng>(vocab: Vocabulary, max_prefix_len: usize, rng: &mut R) -> Self {
        let emittable: Vec<TokenId> = vocab.ids().filter(|&id| vocab.is_emittable(id)).collect();
        let extend_with: Vec<TokenId> = emittable
            .iter()
            .copied()
            .filter(|&id| id != Vocabulary::EOS)
            .collect();
        let mut table = TableLm::new(vocab);
        let ctx_key = table.context_key(&Context::empty());
        let mut frontier = vec![Vec::new()];
        for depth in 0..=max_prefix_len {
            let mut next = Vec::new();
            for prefix in frontier {
                let mut weights = vec![0.0; table.vocab.len()];
                for &id in &emittable {
                    weights[id.index()] = rng.random_range(0.05..1.0);
                }
                let total: f64 = weights.iter().sum();
                let dist = LogProbVector::normalize(
                    weights.iter().map(|w| (w / total).ln()).collect(),
                );
                if depth < max_prefix_len {
                    for &t in &extend_with {
                        let mut p: Vec<TokenId> = prefix.clone();
                        p.push(t);
                        next.push(p);
                    }
                }
                table.entries.insert((ctx_key.clone(), prefix), dist);
            }
            frontier = next;
        }
        table
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl DistributionProvider for TableLm {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn distribution(&self, ctx: &Context, prefix: &[TokenId]) -> Result<LogProbVector, LmError> {
        self.entries
            .get(&(self.context_key(ctx), prefix.to_vec()))
            .cloned()
            .ok_or_else(|| LmError::MissingEntry {
                prefix: prefix.to_vec(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{next_logprobs, sequence_logprob};

    // vocab: <eos>=0 <unk>=1 <pad>=2 a=3
    fn two_token_table() -> TableLm {
        let v = Vocabulary::from_tokens(["a"]);
        TableLm::with_entries(
            v,
            [
                (vec![], LogProbVector::from_probs(&[0.3, 0.0, 0.0, 0.7]).unwrap()),
                (
                    vec![TokenId(3)],
                    LogProbVector::from_probs(&[0.9, 0.0, 0.0, 0.1]).unwrap(),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn random_tables_cover_all_prefixes() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let lm = TableLm::random(Vocabulary::from_tokens(["a", "b"]), 3, &mut rng);
        // non-eos emittable: <unk>, a, b
        assert_eq!(lm.len(), 1 + 3 + 9 + 27);
        let d = next_logprobs(&lm, &Context::empty(), &[TokenId(4), TokenId(1), TokenId(3)]).unwrap();
        assert!(crate::lm::log_sum_exp(d.values()).abs() < 1e-12);
        assert_eq!(d.get(Vocabulary::PAD), f64::NEG_INFINITY);
    }

    #[test]
    fn reads_back_table_entries() {
        let lm = two_token_table();
        let d = next_logprobs(&lm, &Context::empty(), &[]).unwrap();
        assert_eq!(d.get(TokenId(3)), 0.7f64.ln());
        assert_eq!(d.get(Vocabulary::EOS), 0.3f64.ln());
    }

    #[test]
    fn missing_prefix_is_a_coverage_error() {
        let lm = two_token_table();
        let err = next_logprobs(&lm, &Context::empty(), &[TokenId(3), TokenId(3)]).unwrap_err();
        assert!(matches!(err, LmError::MissingEntry { .. }));
    }

    #[test]
    fn unknown_token_is_an_input_error() {
        let lm = two_token_table();
        let err = next_logprobs(&lm, &Context::empty(), &[TokenId(17)]).unwrap_err();
        assert!(matches!(err, LmError::UnknownToken(TokenId(17))));
    }

    #[test]
    fn sequence_logprob_sums_table_entries() {
        let lm = two_token_table();
        let ctx = Context::empty();
        let single = sequence_logprob(&lm, &ctx, &[Vocabulary::EOS]).unwrap();
        assert_eq!(single, 0.3f64.ln());
        let two = sequence_logprob(&lm, &ctx, &[TokenId(3), Vocabulary::EOS]).unwrap();
        assert_eq!(two, 0.7f64.ln() + 0.9f64.ln());
        let again = sequence_logprob(&lm, &ctx, &[TokenId(3), Vocabulary::EOS]).unwrap();
        assert_eq!(two.to_bits(), again.to_bits());
        assert!(matches!(
            sequence_logprob(&lm, &ctx, &[TokenId(3)]),
            Err(LmError::Unterminated)
        ));
        assert!(matches!(
            sequence_logprob(&lm, &ctx, &[]),
            Err(LmError::Unterminated)
        ));
    }
}
