//! TOML configuration file.
//!
//! ```toml
//! [curation]      # CurationConfig
//! [wiki]          # WikiConfig
//! [llm]           # GatewayConfig
//! [generation]    # GenerationParams
//! [grid]          # GridConfig
//! [store]
//! data_dir = "data"
//! [server]
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Every section and key is optional. Environment overrides are applied after
//! parsing: `CRUCIVERBA_WIKI_API`, `CRUCIVERBA_LLM_API_BASE`,
//! `CRUCIVERBA_LLM_API_KEY`, `CRUCIVERBA_LLM_MODEL`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curation::CurationConfig;
use crate::gateway::{GatewayConfig, GenerationParams};
use crate::grid::GridConfig;
use crate::wiki::WikiConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreConfig {
    pub data_dir: PathBuf,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { data_dir: PathBuf::from("data") }
    }
}

impl StoreConfig {
    pub fn clues_dir(&self) -> PathBuf {
        self.data_dir.join("clues")
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.data_dir.join("sessions")
    }

    pub fn puzzles_dir(&self) -> PathBuf {
        self.data_dir.join("puzzles")
    }

    pub fn wiki_cache_dir(&self) -> PathBuf {
        self.data_dir.join("wiki-cache")
    }

    pub fn transcript_path(&self) -> PathBuf {
        self.data_dir.join("transcripts.jsonl")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    pub workers: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { bind: "127.0.0.1:8080".into(), workers: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub curation: CurationConfig,
    pub wiki: WikiConfig,
    pub llm: GatewayConfig,
    pub generation: GenerationParams,
    pub grid: GridConfig,
    pub store: StoreConfig,
    pub server: ServerConfig,
}

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config value: {0}")]
    Invalid(String),
}

impl ConfigLoadError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigLoadError::Read { .. } => "ConfigUnreadable",
            ConfigLoadError::Syntax(_) => "ConfigSyntax",
            ConfigLoadError::Invalid(_) => "ConfigInvalid",
        }
    }
}

impl AppConfig {
    /// Parses and checks a config document without consulting the environment.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigLoadError> {
        let cfg: AppConfig = toml::from_str(text).map_err(|e| ConfigLoadError::Syntax(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads `path` (defaults when `None`) and applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigLoadError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigLoadError::Read { path: p.to_path_buf(), source })?;
                Self::from_toml_str(&text)?
            }
            None => AppConfig::default(),
        };
        cfg.apply_env();
        Ok(cfg)
    }

    pub fn apply_env(&mut self) {
        self.wiki = std::mem::take(&mut self.wiki).with_env();
        self.llm = std::mem::take(&mut self.llm).with_env(&mut self.generation);
    }

    pub fn check(&self) -> Result<(), ConfigLoadError> {
        let invalid = |m: String| Err(ConfigLoadError::Invalid(m));
        if let Err(e) = self.curation.validate() {
            return invalid(e.to_string());
        }
        if let Err(e) = self.generation.validate() {
            return invalid(e.to_string());
        }
        if self.grid.max_width == 0 || self.grid.max_height == 0 || self.grid.node_budget == 0 {
            return invalid("grid bounds and node budget must be positive".into());
        }
        if self.llm.max_in_flight == 0 || self.wiki.max_in_flight == 0 {
            return invalid("max_in_flight must be positive".into());
        }
        if self.server.workers == 0 {
            return invalid("server.workers must be positive".into());
        }
        Ok(())
    }
}
