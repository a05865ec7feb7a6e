use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dialsearch::evalsvc::{EvalError, EvalService, PersonaPool, ServiceConfig, TranscriptStore};
use dialsearch::lm::{LmError, NGramLm};

/// `serve` configuration file (TOML).
///
/// ```toml
/// model = "model.json"
/// personas = "data/personas.txt"
/// transcripts = "transcripts.jsonl"
/// host = "127.0.0.1"
/// port = 8080
///
/// [service]
/// seed = 0
/// sessions_per_strategy = 6
/// min_turn_choices = [5, 6]
///
/// [service.search]
/// beam_width = 5
/// ```
///
/// Relative paths are resolved against the config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    pub model: PathBuf,
    pub personas: PathBuf,
    pub transcripts: PathBuf,
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default)]
    pub service: ServiceConfig,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: LmError },
    #[error("{path}: {source}")]
    Service { path: PathBuf, source: EvalError },
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ServerConfig = toml::from_str(&read(path)?).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.model, &mut cfg.personas, &mut cfg.transcripts] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Loads the model and persona pool named by `cfg` and builds the service.
pub fn load_service(cfg: &ServerConfig) -> Result<Arc<EvalService<NGramLm>>, ConfigError> {
    let model = NGramLm::from_json(&read(&cfg.model)?).map_err(|source| ConfigError::Model {
        path: cfg.model.clone(),
        source,
    })?;
    let personas = PersonaPool::parse(&read(&cfg.personas)?).map_err(|source| ConfigError::Service {
        path: cfg.personas.clone(),
        source,
    })?;
    let svc = EvalService::new(
        Arc::new(model),
        personas,
        cfg.service.clone(),
        TranscriptStore::new(&cfg.transcripts),
    )
    .map_err(|source| ConfigError::Service {
        path: cfg.model.clone(),
        source,
    })?;
    Ok(Arc::new(svc))
}
