//! A scripted annotator driving the service over HTTP.

use std::path::PathBuf;
use std::sync::Arc;

use reqwest::StatusCode;
use serde_json::{json, Value};

use dialsearch::evalsvc::{EvalService, PersonaPool, ServiceConfig, TranscriptStore};
use dialsearch::lm::{parse_corpus, train_ngram, NGramConfig};
use dialsearch::search::SearchConfig;

fn data(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn asset(name: &str) -> Vec<u8> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/assets/questionnaire")
        .join(name);
    std::fs::read(p).unwrap()
}

struct Server {
    base: String,
    client: reqwest::Client,
    _dir: tempfile::TempDir,
}

impl Server {
    async fn start(seed: u64) -> Server {
        let model = train_ngram(&parse_corpus(&data("sample_corpus.txt")).unwrap(), NGramConfig::default()).unwrap();
        let pool = PersonaPool::parse(&data("personas.txt")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let config = ServiceConfig {
            seed,
            search: SearchConfig {
                iterations: 3,
                ..Default::default()
            },
            ..Default::default()
        };
        let svc = EvalService::new(
            Arc::new(model),
            pool,
            config,
            TranscriptStore::new(dir.path().join("t.jsonl")),
        )
        .unwrap();
        let app = dialsearch_server::router(Arc::new(svc));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Server {
            base: format!("http://{addr}"),
            client: reqwest::Client::new(),
            _dir: dir,
        }
    }

    async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        let r = self
            .client
            .post(format!("{}{path}", self.base))
            .json(&body)
            .send()
            .await
            .unwrap();
        let status = r.status();
        (status, r.json().await.unwrap())
    }

    async fn get(&self, path: &str) -> (StatusCode, Value) {
        let r = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        let status = r.status();
        (status, r.json().await.unwrap())
    }

    async fn open(&self, annotator: &str, strategy: Option<&str>) -> (StatusCode, Value) {
        let mut body = json!({ "annotator": annotator });
        if let Some(s) = strategy {
            body["strategy"] = json!(s);
        }
        self.post("/sessions", body).await
    }
}

fn code(v: &Value) -> &str {
    v["error"]["code"].as_str().unwrap_or("")
}

#[tokio::test(flavor = "multi_thread")]
async fn quota_is_six_per_strategy() {
    let s = Server::start(1).await;
    for _ in 0..6 {
        let (st, _) = s.open("w1", Some("iter-beam")).await;
        assert_eq!(st, StatusCode::CREATED);
    }
    let (st, body) = s.open("w1", Some("iter-beam")).await;
    assert_eq!(st, StatusCode::FORBIDDEN);
    assert_eq!(code(&body), "quota");

    // unforced creation still works until every strategy is used up
    for _ in 0..12 {
        assert_eq!(s.open("w1", None).await.0, StatusCode::CREATED);
    }
    let (st, body) = s.open("w1", None).await;
    assert_eq!((st, code(&body)), (StatusCode::FORBIDDEN, "quota"));
    assert_eq!(s.open("w2", None).await.0, StatusCode::CREATED);
}

#[tokio::test(flavor = "multi_thread")]
async fn scores_unlock_only_after_min_turns() {
    let s = Server::start(2).await;
    let (_, view) = s.open("w1", None).await;
    let id = view["session_id"].as_str().unwrap().to_string();
    let min = view["min_turns"].as_u64().unwrap() as usize;
    assert!(min == 5 || min == 6);
    assert!(view.get("strategy").is_none(), "strategy must stay hidden");
    assert!(view["persona"].as_array().unwrap().len() >= 4);

    let flags = |n: usize| vec![false; n];
    for i in 1..=min {
        let (st, body) = s.post(&format!("/sessions/{id}/annotation"), json!({
            "annotator": "w1", "overall": 3, "good_pairs": flags(i - 1), "bad_pairs": flags(i - 1)
        })).await;
        assert_eq!((st, code(&body)), (StatusCode::CONFLICT, "protocol"), "after {} pairs", i - 1);

        let (st, reply) = s.post(&format!("/sessions/{id}/messages"), json!({ "text": "do you have any pets ?" })).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(reply["pairs"].as_u64().unwrap() as usize, i);
        assert!(reply.get("candidates").is_none());
        let expected = if i == min { "awaiting_scores" } else { "chatting" };
        assert_eq!(reply["state"], expected);
    }
    let (st, body) = s.post(&format!("/sessions/{id}/messages"), json!({ "text": "hello ?" })).await;
    assert_eq!((st, code(&body)), (StatusCode::CONFLICT, "state"));

    // wrong flag length, then out-of-range score
    let (st, body) = s.post(&format!("/sessions/{id}/annotation"), json!({
        "annotator": "w1", "overall": 3, "good_pairs": flags(min - 1), "bad_pairs": flags(min)
    })).await;
    assert_eq!((st, code(&body)), (StatusCode::UNPROCESSABLE_ENTITY, "validation"));
    let (st, body) = s.post(&format!("/sessions/{id}/annotation"), json!({
        "annotator": "w1", "overall": 5, "good_pairs": flags(min), "bad_pairs": flags(min)
    })).await;
    assert_eq!((st, code(&body)), (StatusCode::UNPROCESSABLE_ENTITY, "validation"));

    let (st, body) = s.post(&format!("/sessions/{id}/annotation"), json!({
        "annotator": "w1", "overall": 4, "good_pairs": flags(min), "bad_pairs": flags(min)
    })).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(body["state"], "closed");

    let (st, records) = s.get("/transcripts").await;
    assert_eq!(st, StatusCode::OK);
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["annotation"]["overall"], 4);
    assert_eq!(records[0]["turns"].as_array().unwrap().len(), 2 * min);
    assert_eq!(s.get(&format!("/sessions/{id}")).await.1["state"], "closed");
}

#[tokio::test(flavor = "multi_thread")]
async fn questionnaire_text_is_byte_identical() {
    let s = Server::start(3).await;
    let raw = s
        .client
        .get(format!("{}/questionnaire", s.base))
        .send()
        .await
        .unwrap()
        .bytes()
        .await
        .unwrap();
    let q: Value = serde_json::from_slice(&raw).unwrap();
    let questions = q["questions"].as_array().unwrap();
    let expected = [
        ("overall", "overall.txt"),
        ("good_pairs", "good_pairs.txt"),
        ("bad_pairs", "bad_pairs.txt"),
    ];
    assert_eq!(questions.len(), expected.len());
    for (q, (id, file)) in questions.iter().zip(expected) {
        assert_eq!(q["id"], id);
        assert_eq!(q["prompt"].as_str().unwrap().as_bytes(), asset(file).as_slice(), "{id}");
    }
    assert_eq!(questions[0]["choices"], json!([1, 2, 3, 4]));
}

#[tokio::test(flavor = "multi_thread")]
async fn errors_are_json() {
    let s = Server::start(4).await;
    let (st, body) = s.get("/sessions/missing").await;
    assert_eq!((st, code(&body)), (StatusCode::NOT_FOUND, "not_found"));
    let (st, body) = s.post("/sessions/missing/messages", json!({ "text": "hi" })).await;
    assert_eq!((st, code(&body)), (StatusCode::NOT_FOUND, "not_found"));
    let (st, body) = s.post("/sessions", json!({ "who": "x" })).await;
    assert_eq!((st, code(&body)), (StatusCode::BAD_REQUEST, "bad_request"));
    let (st, body) = s.post("/sessions", json!({ "annotator": "x", "strategy": "sampling" })).await;
    assert_eq!((st, code(&body)), (StatusCode::BAD_REQUEST, "bad_request"));
    let (_, view) = s.open("x", None).await;
    let id = view["session_id"].as_str().unwrap();
    let (st, body) = s.post(&format!("/sessions/{id}/messages"), json!({ "text": "  " })).await;
    assert_eq!((st, code(&body)), (StatusCode::UNPROCESSABLE_ENTITY, "validation"));
    assert_eq!(s.get("/health").await.1["status"], "ok");
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_sessions_all_land_in_the_transcript_file() {
    let s = Arc::new(Server::start(5).await);
    let mut tasks = Vec::new();
    for w in 0..4 {
        let s = s.clone();
        tasks.push(tokio::spawn(async move {
            let annotator = format!("w{w}");
            let (_, view) = s.open(&annotator, None).await;
            let id = view["session_id"].as_str().unwrap().to_string();
            let min = view["min_turns"].as_u64().unwrap() as usize;
            for _ in 0..min {
                let (st, _) = s.post(&format!("/sessions/{id}/messages"), json!({ "text": "what do you do for fun ?" })).await;
                assert_eq!(st, StatusCode::OK);
            }
            let (st, _) = s.post(&format!("/sessions/{id}/annotation"), json!({
                "annotator": annotator, "overall": 2, "good_pairs": vec![true; min], "bad_pairs": vec![false; min]
            })).await;
            assert_eq!(st, StatusCode::CREATED);
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    let (_, records) = s.get("/transcripts").await;
    assert_eq!(records.as_array().unwrap().len(), 4);
}
