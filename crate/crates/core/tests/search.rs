mod common;

use std::collections::HashSet;

use common::{all_responses, brute_force_best, exhaustive_config, random_instance, random_shape};
use dialsearch::lm::{sequence_logprob, Context, LogProbVector, TableLm, TokenId, Vocabulary};
use dialsearch::search::{
    beam_search, blocks_ngram, greedy_decode, hamming_dissimilarity, iterative_beam_search,
    length_penalized_score, select_final, IterMode, SearchConfig,
};
use proptest::prelude::*;

fn ctx() -> Context {
    Context::empty()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exhaustive_beam_finds_the_argmax(seed in any::<u64>()) {
        let (v, l) = random_shape(seed);
        let lm = random_instance(seed, v, l);
        let cfg = exhaustive_config(v, l);
        let (cands, _) = beam_search(&lm, &ctx(), &cfg).unwrap();
        let best = select_final(&cands).unwrap();
        let (tokens, score) = brute_force_best(&lm, &ctx(), l);
        prop_assert_eq!(&best.hypothesis.tokens, &tokens);
        prop_assert_eq!(best.hypothesis.score.to_bits(), score.to_bits());
        // nothing pruned, so every response was found
        prop_assert_eq!(cands.len(), all_responses(&lm, &ctx(), l).len());
    }

    #[test]
    fn width_one_beam_is_greedy(seed in any::<u64>()) {
        let (v, l) = random_shape(seed);
        let lm = random_instance(seed, v, l + 1);
        let cfg = SearchConfig {
            beam_width: 1,
            max_candidates: 1,
            max_length: l,
            block_ngram: 0,
            length_penalty_alpha: 0.0,
            ..SearchConfig::default()
        };
        let g = greedy_decode(&lm, &ctx(), &cfg).unwrap();
        let (cands, _) = beam_search(&lm, &ctx(), &cfg).unwrap();
        let b = select_final(&cands).unwrap();
        prop_assert_eq!(&g.tokens, &b.hypothesis.tokens);
        prop_assert_eq!(g.score.to_bits(), b.hypothesis.score.to_bits());
    }

    #[test]
    fn candidate_scores_are_sequence_logprobs(
        seed in any::<u64>(),
        width in 1usize..4,
        block in 0usize..4,
        iterations in 1usize..5,
        epsilon in prop::sample::select(vec![0.5, 1.0, 2.0]),
    ) {
        let lm = random_instance(seed, 5, 6);
        let cfg = SearchConfig {
            beam_width: width,
            max_candidates: 3,
            max_length: 5,
            block_ngram: block,
            iterations,
            epsilon,
            ..SearchConfig::default()
        };
        let (beam, _) = beam_search(&lm, &ctx(), &cfg).unwrap();
        let (iter, _) = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Parallel).unwrap();
        for c in beam.iter().chain(iter.iter()) {
            let lp = sequence_logprob(&lm, &ctx(), &c.hypothesis.tokens).unwrap();
            prop_assert!((c.hypothesis.score - lp).abs() < 1e-9);
            let pen = length_penalized_score(lp, c.hypothesis.len(), cfg.length_penalty_alpha);
            prop_assert!((c.selection_score - pen).abs() < 1e-9);
            prop_assert_eq!(c.hypothesis.tokens.last(), Some(&Vocabulary::EOS));
            prop_assert!(c.hypothesis.len() <= cfg.max_length + usize::from(c.forced));
            if block > 0 {
                prop_assert!(!blocks_ngram(&c.hypothesis.tokens, block));
            }
        }
    }

    #[test]
    fn iterating_never_hurts_and_respects_exclusion(
        seed in any::<u64>(),
        width in 1usize..4,
        block in 0usize..3,
        iterations in 1usize..6,
        epsilon in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
    ) {
        let lm = random_instance(seed, 5, 6);
        let cfg = SearchConfig {
            beam_width: width,
            max_candidates: 4,
            max_length: 5,
            block_ngram: block,
            iterations,
            epsilon,
            ..SearchConfig::default()
        };
        let (beam, beam_trace) = beam_search(&lm, &ctx(), &cfg).unwrap();
        let (seq, seq_trace) = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Sequential).unwrap();
        let (par, par_trace) = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Parallel).unwrap();

        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(&seq_trace, &par_trace);
        prop_assert!(seq_trace.exclusion_violations(epsilon).is_empty());

        // iteration 0 is plain beam search
        prop_assert_eq!(&seq_trace.iterations[0], &beam_trace.iterations[0]);
        let b = select_final(&beam).unwrap();
        let it = select_final(&seq).unwrap();
        prop_assert!(it.selection_score >= b.selection_score);
        prop_assert_eq!(&seq.candidates[0].hypothesis, &b.hypothesis);
    }
}

#[test]
fn single_token_vocabulary_matches_enumeration() {
    // <eos>=0 <unk>=1 <pad>=2 a=3; <unk> never emitted
    let a = TokenId(3);
    let d = |eos: f64| LogProbVector::from_probs(&[eos, 0.0, 0.0, 1.0 - eos]).unwrap();
    let lm = TableLm::with_entries(
        Vocabulary::from_tokens(["a"]),
        [(vec![], d(0.5)), (vec![a], d(0.6)), (vec![a, a], d(0.3))],
    )
    .unwrap();
    let cfg = SearchConfig {
        beam_width: 2,
        max_candidates: 2,
        max_length: 3,
        block_ngram: 0,
        length_penalty_alpha: 0.0,
        ..SearchConfig::default()
    };
    let (cands, _) = beam_search(&lm, &ctx(), &cfg).unwrap();

    let mut all = all_responses(&lm, &ctx(), 3);
    assert_eq!(all.len(), 3);
    all.sort_by(|x, y| y.1.total_cmp(&x.1));
    let expected: HashSet<Vec<TokenId>> = all.iter().take(2).map(|r| r.0.clone()).collect();
    let found: HashSet<Vec<TokenId>> = cands.iter().map(|c| c.hypothesis.tokens.clone()).collect();
    assert_eq!(found, expected);
    for c in cands.iter() {
        let (_, lp) = all.iter().find(|r| r.0 == c.hypothesis.tokens).unwrap();
        assert_eq!(c.hypothesis.score, *lp);
    }
}

#[test]
fn unigram_blocking_stops_repetition() {
    // prefers repeating whatever came last
    let vocab = Vocabulary::from_tokens(["a", "b"]);
    let (a, b) = (TokenId(3), TokenId(4));
    let mut lm = TableLm::new(vocab.clone());
    let mut prefixes = vec![vec![]];
    for _ in 0..5 {
        let mut next = Vec::new();
        for p in &prefixes {
            let last = p.last().copied();
            let probs = match last {
                Some(t) if t == a => [0.1, 0.0, 0.0, 0.8, 0.1],
                Some(_) => [0.1, 0.0, 0.0, 0.1, 0.8],
                None => [0.1, 0.0, 0.0, 0.6, 0.3],
            };
            lm.insert(&ctx(), p, LogProbVector::from_probs(&probs).unwrap())
                .unwrap();
            for t in [a, b] {
                let mut q = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        prefixes = next;
    }
    let base = SearchConfig {
        beam_width: 2,
        max_candidates: 4,
        max_length: 4,
        length_penalty_alpha: 0.0,
        ..SearchConfig::default()
    };
    let unblocked = SearchConfig { block_ngram: 0, ..base.clone() };
    let (cands, _) = beam_search(&lm, &ctx(), &unblocked).unwrap();
    assert!(cands.iter().any(|c| blocks_ngram(&c.hypothesis.tokens, 1)));

    let blocked = SearchConfig { block_ngram: 1, ..base };
    let (cands, _) = beam_search(&lm, &ctx(), &blocked).unwrap();
    assert!(!cands.is_empty());
    for c in cands.iter() {
        let toks = &c.hypothesis.tokens;
        let uniq: HashSet<_> = toks.iter().collect();
        assert_eq!(uniq.len(), toks.len(), "{toks:?}");
    }
}

#[test]
fn one_iteration_is_beam_search() {
    for seed in 0..20 {
        let lm = random_instance(seed, 5, 6);
        let cfg = SearchConfig {
            beam_width: 2,
            max_candidates: 3,
            max_length: 5,
            iterations: 1,
            ..SearchConfig::default()
        };
        let (beam, beam_trace) = beam_search(&lm, &ctx(), &cfg).unwrap();
        for mode in [IterMode::Sequential, IterMode::Parallel] {
            let (iter, trace) = iterative_beam_search(&lm, &ctx(), &cfg, mode).unwrap();
            assert_eq!(trace, beam_trace);
            assert_eq!(
                select_final(&iter).unwrap().hypothesis,
                select_final(&beam).unwrap().hypothesis
            );
        }
    }
}

#[test]
fn iterations_return_distinct_responses() {
    // three content tokens, L_max = 3, R = 3, epsilon = 1
    for seed in 0..20 {
        let lm = random_instance(seed, 6, 4);
        let cfg = SearchConfig {
            beam_width: 2,
            max_candidates: 2,
            max_length: 3,
            block_ngram: 0,
            iterations: 3,
            epsilon: 1.0,
            ..SearchConfig::default()
        };
        let (cands, trace) = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Sequential).unwrap();
        assert!(trace.exclusion_violations(1.0).is_empty());
        let list: Vec<_> = cands.iter().map(|c| &c.hypothesis.tokens).collect();
        for i in 0..list.len() {
            for j in 0..i {
                assert!(hamming_dissimilarity(list[i], list[j]) >= 1.0, "{list:?}");
            }
        }
    }
}

#[test]
fn sequential_and_parallel_agree_on_random_tables() {
    for seed in 100..120 {
        let lm = random_instance(seed, 5, 7);
        let cfg = SearchConfig {
            beam_width: 3,
            max_candidates: 4,
            max_length: 6,
            block_ngram: 2,
            iterations: 6,
            epsilon: 2.0,
            ..SearchConfig::default()
        };
        let seq = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Sequential).unwrap();
        let par = iterative_beam_search(&lm, &ctx(), &cfg, IterMode::Parallel).unwrap();
        assert_eq!(seq, par);
    }
}
