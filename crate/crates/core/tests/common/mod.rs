//! Fixtures shared by integration tests: random table models and a
//! brute-force enumerator over every terminated response.
#![allow(dead_code)]

use dialsearch::lm::{sequence_logprob, Context, DistributionProvider, TableLm, TokenId, Vocabulary};
use dialsearch::search::SearchConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random table over `vocab_size` tokens (3 reserved ones plus content
/// tokens) covering every prefix shorter than `max_length`.
pub fn random_instance(seed: u64, vocab_size: usize, max_length: usize) -> TableLm {
    assert!((3..=8).contains(&vocab_size));
    let words: Vec<String> = (0..vocab_size - 3).map(|i| format!("w{i}")).collect();
    let vocab = Vocabulary::from_tokens(words.iter().map(String::as_str));
    assert_eq!(vocab.len(), vocab_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TableLm::random(vocab, max_length.saturating_sub(1), &mut rng)
}

/// Draws (|V|, L_max) with |V| in 3..=5 and L_max in 1..=6 from the seed.
pub fn random_shape(seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (rng.random_range(3..=5), rng.random_range(1..=6))
}

/// Every `<eos>`-terminated sequence of length at most `max_length` whose
/// tokens all have finite probability.
pub fn all_responses(model: &TableLm, ctx: &Context, max_length: usize) -> Vec<(Vec<TokenId>, f64)> {
    let vocab = model.vocab();
    let body: Vec<TokenId> = vocab
        .ids()
        .filter(|&t| t != Vocabulary::EOS && vocab.is_emittable(t))
        .collect();
    let mut out = Vec::new();
    let mut prefixes: Vec<Vec<TokenId>> = vec![vec![]];
    for _ in 0..max_length {
        let mut next = Vec::new();
        for p in &prefixes {
            let d = model.distribution(ctx, p).unwrap();
            if d.get(Vocabulary::EOS).is_finite() {
                let mut r = p.clone();
                r.push(Vocabulary::EOS);
                let lp = sequence_logprob(model, ctx, &r).unwrap();
                out.push((r, lp));
            }
            for &t in body.iter().filter(|&&t| d.get(t).is_finite()) {
                let mut q = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        prefixes = next;
    }
    out
}

/// Highest score; shorter, then lexicographically smaller sequences win ties.
pub fn brute_force_best(model: &TableLm, ctx: &Context, max_length: usize) -> (Vec<TokenId>, f64) {
    all_responses(model, ctx, max_length)
        .into_iter()
        .max_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(b.0.len().cmp(&a.0.len()))
                .then(b.0.cmp(&a.0))
        })
        .unwrap()
}

/// Width and candidate cap large enough that nothing is ever pruned.
pub fn exhaustive_config(vocab_size: usize, max_length: usize) -> SearchConfig {
    // body tokens exclude <eos> and <pad>
    let m = vocab_size - 2;
    let responses: usize = (0..max_length).map(|l| m.pow(l as u32)).sum();
    SearchConfig {
        beam_width: (m + 1).pow(max_length as u32),
        max_candidates: responses,
        max_length,
        block_ngram: 0,
        length_penalty_alpha: 0.0,
        ..SearchConfig::default()
    }
}
