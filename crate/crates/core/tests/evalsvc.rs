#[path = "common/dialogue.rs"]
mod dialogue;

use std::sync::Arc;

use dialogue::{persona_pool, sample_model};
use dialsearch::evalsvc::{
    binary_observations, metrics_inputs, parse_jsonl, self_play, star_observations,
    AnnotationRecord, EvalError, EvalService, PairFlag, Questionnaire, ServiceConfig,
    SessionState, TranscriptStore, BAD_PAIRS_PROMPT, GOOD_PAIRS_PROMPT, OVERALL_PROMPT,
};
use dialsearch::lm::{tokenize, Context, DistributionProvider, NGramLm, Speaker};
use dialsearch::metrics::{build_report, Pooling};
use dialsearch::search::{decode, SearchConfig, Strategy};

fn small_search() -> SearchConfig {
    SearchConfig {
        iterations: 4,
        ..Default::default()
    }
}

fn service(dir: &tempfile::TempDir, seed: u64) -> EvalService<NGramLm> {
    let config = ServiceConfig {
        seed,
        search: small_search(),
        ..Default::default()
    };
    EvalService::new(
        Arc::new(sample_model()),
        persona_pool(),
        config,
        TranscriptStore::new(dir.path().join("transcripts.jsonl")),
    )
    .unwrap()
}

fn chat_to_scores(svc: &EvalService<NGramLm>, id: &str) -> usize {
    let min = svc.get_session(id).unwrap().min_turns;
    for i in 0..min {
        let r = svc.post_message(id, &format!("hi , do you have any pets ? {i}")).unwrap();
        assert_eq!(r.pairs, i + 1);
    }
    min
}

fn annotation(annotator: &str, pairs: usize) -> AnnotationRecord {
    AnnotationRecord {
        annotator: annotator.into(),
        overall: 3,
        good_pairs: (0..pairs).map(|i| i % 2 == 0).collect(),
        bad_pairs: (0..pairs).map(|i| i == 1).collect(),
    }
}

#[test]
fn seventh_session_on_a_strategy_hits_the_quota() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 1);
    for _ in 0..6 {
        svc.create_session("ann", Some(Strategy::Beam)).unwrap();
    }
    let err = svc.create_session("ann", Some(Strategy::Beam)).unwrap_err();
    assert!(matches!(err, EvalError::Quota { .. }), "{err}");
    // other strategies and other annotators are unaffected
    svc.create_session("ann", Some(Strategy::Greedy)).unwrap();
    svc.create_session("other", Some(Strategy::Beam)).unwrap();
}

#[test]
fn random_assignment_fills_every_strategy_then_stops() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 2);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..18 {
        let id = svc.create_session("ann", None).unwrap().session_id;
        *counts.entry(svc.inspect(&id).unwrap().strategy).or_insert(0) += 1;
    }
    assert_eq!(counts.values().copied().collect::<Vec<_>>(), vec![6, 6, 6]);
    assert!(matches!(
        svc.create_session("ann", None),
        Err(EvalError::Quota { strategy: None, .. })
    ));
}

#[test]
fn assignments_are_reproducible_under_a_seed() {
    let assignments = |seed| {
        let dir = tempfile::tempdir().unwrap();
        let svc = service(&dir, seed);
        (0..10)
            .map(|i| {
                let id = svc.create_session(&format!("a{}", i % 3), None).unwrap().session_id;
                let s = svc.inspect(&id).unwrap();
                (s.strategy, s.personas, s.min_turns)
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(assignments(9), assignments(9));
    let mins: Vec<usize> = assignments(9).into_iter().map(|a| a.2).collect();
    assert!(mins.iter().all(|m| *m == 5 || *m == 6));
}

#[test]
fn scores_are_gated_on_min_turns() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 3);
    let id = svc.create_session("ann", Some(Strategy::Beam)).unwrap().session_id;
    let min = svc.get_session(&id).unwrap().min_turns;
    for _ in 0..min - 1 {
        svc.post_message(&id, "what do you do for work ?").unwrap();
    }
    let err = svc.submit_annotation(&id, &annotation("ann", min - 1)).unwrap_err();
    assert!(matches!(err, EvalError::Protocol(_)), "{err}");
    let r = svc.post_message(&id, "do you have any pets ?").unwrap();
    assert_eq!(r.state, SessionState::AwaitingScores);
    assert!(matches!(
        svc.post_message(&id, "one more ?"),
        Err(EvalError::State { .. })
    ));
}

#[test]
fn annotation_validation() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 4);
    let id = svc.create_session("ann", Some(Strategy::Greedy)).unwrap().session_id;
    let pairs = chat_to_scores(&svc, &id);

    let mut short = annotation("ann", pairs);
    short.good_pairs.pop();
    assert!(matches!(svc.submit_annotation(&id, &short), Err(EvalError::Validation(_))));
    let mut five = annotation("ann", pairs);
    five.overall = 5;
    assert!(matches!(svc.submit_annotation(&id, &five), Err(EvalError::Validation(_))));
    let mut zero = annotation("ann", pairs);
    zero.overall = 0;
    assert!(matches!(svc.submit_annotation(&id, &zero), Err(EvalError::Validation(_))));

    // a pair may be both good and bad
    let mut both = annotation("ann", pairs);
    both.good_pairs[1] = true;
    let stored = svc.submit_annotation(&id, &both).unwrap();
    assert_eq!(stored.pairs(), pairs);
    assert_eq!(svc.get_session(&id).unwrap().state, SessionState::Closed);
    assert!(matches!(svc.submit_annotation(&id, &both), Err(EvalError::State { .. })));
    assert!(matches!(svc.post_message(&id, "hello"), Err(EvalError::State { .. })));
}

#[test]
fn bad_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 5);
    let id = svc.create_session("ann", None).unwrap().session_id;
    assert!(matches!(svc.post_message(&id, "   "), Err(EvalError::Validation(_))));
    assert!(matches!(svc.post_message("nope", "hi"), Err(EvalError::NotFound(_))));
    assert!(matches!(svc.create_session(" ", None), Err(EvalError::Validation(_))));
}

#[test]
fn first_reply_matches_a_direct_search() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 6);
    let model = sample_model();
    for strategy in Strategy::ALL {
        let id = svc.create_session("ann", Some(strategy)).unwrap().session_id;
        let reply = svc.post_message(&id, "hello ! what do you do for fun ?").unwrap();
        let session = svc.inspect(&id).unwrap();
        let vocab = model.vocab();
        let ids = |text: &str| -> Vec<_> {
            tokenize(text).iter().map(|w| vocab.id_or_unk(w)).collect()
        };
        let persona = session.personas.b.iter().map(|l| ids(l)).collect();
        let opener = ids("hello ! what do you do for fun ?");
        let ctx = Context::new(persona, vec![(Speaker::A, opener)]).unwrap();
        let direct = decode(&model, &ctx, strategy, &small_search()).unwrap();
        let text = model.vocab().detokenize(&direct.selected().hypothesis.tokens);
        assert_eq!(reply.text, text, "{strategy}");
        let gen = session.turns[1].generation.as_ref().unwrap();
        assert_eq!(gen.candidates.len(), direct.candidates.candidates.len());
    }
}

#[test]
fn stored_transcripts_replay_and_feed_the_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 7);
    let model = sample_model();
    for (k, strategy) in Strategy::ALL.into_iter().enumerate() {
        for a in 0..2 {
            let annotator = format!("ann{a}");
            let id = svc.create_session(&annotator, Some(strategy)).unwrap().session_id;
            let pairs = chat_to_scores(&svc, &id);
            let mut ann = annotation(&annotator, pairs);
            ann.overall = 1 + k as u8;
            svc.submit_annotation(&id, &ann).unwrap();
        }
    }
    let text = std::fs::read_to_string(svc.store().path()).unwrap();
    assert_eq!(text.lines().count(), 6);
    let records = parse_jsonl(&text).unwrap();
    assert_eq!(records, svc.transcripts().unwrap());
    for r in &records {
        r.replay(&model).unwrap();
    }

    let report = build_report(&metrics_inputs(&records), Pooling::Conversation).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|row| row.conversations == 2));
    let star = star_observations(&records).unwrap();
    assert_eq!(star.scores.len(), 6);
    let good = binary_observations(&records, PairFlag::Good).unwrap();
    assert_eq!(good.labels.len(), records.iter().map(|r| r.pairs()).sum::<usize>());
}

#[test]
fn tampered_transcript_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(&dir, 8);
    let id = svc.create_session("ann", Some(Strategy::Beam)).unwrap().session_id;
    let pairs = chat_to_scores(&svc, &id);
    let mut record = svc.submit_annotation(&id, &annotation("ann", pairs)).unwrap();
    record.turns[3].text = "something else entirely".into();
    assert!(matches!(
        record.replay(&sample_model()),
        Err(EvalError::ReplayMismatch { turn: 3 })
    ));
}

#[test]
fn self_play_is_deterministic_and_greedy_has_one_candidate() {
    let model = sample_model();
    let pool = persona_pool();
    let run = |strategy| {
        let records = self_play(&model, &pool, 2, strategy, 6, 11, &small_search()).unwrap();
        records.iter().map(|r| r.to_json_line()).collect::<String>()
    };
    assert_eq!(run(Strategy::IterBeam), run(Strategy::IterBeam));

    let greedy = self_play(&model, &pool, 3, Strategy::Greedy, 6, 11, &small_search()).unwrap();
    for r in &greedy {
        assert_eq!(r.turns.len(), 6);
        for t in r.turns.iter().filter_map(|t| t.generation.as_ref()) {
            assert_eq!(t.candidates.len(), 1);
        }
        r.replay(&model).unwrap();
    }
    // same seed, same persona pairs and openers across strategies
    let beam = self_play(&model, &pool, 3, Strategy::Beam, 6, 11, &small_search()).unwrap();
    for (g, b) in greedy.iter().zip(&beam) {
        assert_eq!(g.personas, b.personas);
        assert_eq!(g.turns[0], b.turns[0]);
    }
}

#[test]
fn questionnaire_matches_the_bundled_wording() {
    let q = Questionnaire::default();
    let prompts: Vec<&str> = q.questions.iter().map(|q| q.prompt.as_str()).collect();
    assert_eq!(prompts, vec![OVERALL_PROMPT, GOOD_PAIRS_PROMPT, BAD_PAIRS_PROMPT]);
    assert!(OVERALL_PROMPT.starts_with("Now the conversation is completed!"));
    assert!(OVERALL_PROMPT.contains("score from [1, 2, 3, 4]"));
    assert_eq!(q.questions[0].choices, vec![1, 2, 3, 4]);
}
