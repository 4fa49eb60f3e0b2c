//! The main configuration file (TOML, `version = 1`). Relative paths inside
//! it resolve against the file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsl::{PauseConfig, VariableSpec, BOWL_COUNT};
use crate::llm::{EnvironmentDescription, DEFAULT_HISTORY_CAP};
use crate::sim::{InitialVariables, TrajectoryConfig};
use crate::speech::{EndpointConfig, DEFAULT_WAKE_PHRASE};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub bowls: Vec<String>,
    pub task_summary: String,
    pub robot_summary: String,
    /// Example commands shown next to the user.
    #[serde(default)]
    pub cheat_sheet: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WakeBackendKind {
    Keyword,
    PushToTalk,
    AlwaysOn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechConfig {
    pub wake_backend: WakeBackendKind,
    #[serde(default = "default_wake_phrase")]
    pub wake_phrase: String,
    pub stt_backend: BackendKind,
    pub mock_corpus: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: EndpointConfig,
}

fn default_wake_phrase() -> String {
    DEFAULT_WAKE_PHRASE.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    pub backend: BackendKind,
    pub prompt_template: PathBuf,
    pub mock_rules: Option<PathBuf>,
    #[serde(default = "default_history_cap")]
    pub history_cap: usize,
}

fn default_history_cap() -> usize {
    DEFAULT_HISTORY_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutorConfig {
    pub tick_ms: u64,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self { tick_ms: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub variables: VariableSpec,
    #[serde(default)]
    pub initial: InitialVariables,
    #[serde(default)]
    pub pause: PauseConfig,
    #[serde(default)]
    pub executor: ExecutorConfig,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    pub speech: SpeechConfig,
    pub llm: LlmConfig,
    /// Directory relative paths resolve against. Not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn from_toml(src: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut cfg: Config = toml::from_str(src)?;
        cfg.base_dir = base_dir.into();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&src, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.version != CONFIG_VERSION {
            return invalid(format!("unsupported config version {}", self.version));
        }
        if self.environment.bowls.len() != BOWL_COUNT {
            return invalid(format!(
                "expected {BOWL_COUNT} bowls, got {}",
                self.environment.bowls.len()
            ));
        }
        for (name, range) in [
            ("speed", &self.variables.speed),
            ("acceleration", &self.variables.acceleration),
            ("scoop_depth", &self.variables.scoop_depth),
        ] {
            if let Err(e) = range.check() {
                return invalid(format!("variables.{name}: {e}"));
            }
        }
        let p = &self.pause;
        if !(p.max_sleep_s.is_finite() && p.max_sleep_s > 0.0) {
            return invalid("pause.max_sleep_s must be positive".into());
        }
        if !(0.0..=p.max_sleep_s).contains(&p.min_delay_s) {
            return invalid("pause.min_delay_s must lie in [0, max_sleep_s]".into());
        }
        if self.executor.tick_ms == 0 {
            return invalid("executor.tick_ms must be at least 1".into());
        }
        if self.trajectory.check().is_err() {
            return invalid("trajectory lengths must be positive".into());
        }
        if self.llm.backend == BackendKind::Mock && self.llm.mock_rules.is_none() {
            return invalid("llm.mock_rules is required for the mock backend".into());
        }
        if self.speech.stt_backend == BackendKind::Mock && self.speech.mock_corpus.is_none() {
            return invalid("speech.mock_corpus is required for the mock backend".into());
        }
        Ok(())
    }

    pub fn environment_description(&self) -> EnvironmentDescription {
        let bowls = &self.environment.bowls;
        EnvironmentDescription {
            bowl_contents: std::array::from_fn(|i| bowls[i].clone()),
            task_summary: self.environment.task_summary.clone(),
            robot_physical_summary: self.environment.robot_summary.clone(),
        }
    }
}
