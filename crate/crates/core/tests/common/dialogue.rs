//! The bundled persona pool and a default n-gram model trained on the bundled
//! sample corpus.

use std::path::PathBuf;

use dialsearch::evalsvc::PersonaPool;
use dialsearch::lm::{parse_corpus, train_ngram, NGramConfig, NGramLm};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn sample_model() -> NGramLm {
    let text = std::fs::read_to_string(data_dir().join("sample_corpus.txt")).unwrap();
    let corpus = parse_corpus(&text).unwrap();
    train_ngram(&corpus, NGramConfig::default()).unwrap()
}

pub fn persona_pool() -> PersonaPool {
    let text = std::fs::read_to_string(data_dir().join("personas.txt")).unwrap();
    PersonaPool::parse(&text).unwrap()
}
