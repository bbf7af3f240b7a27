use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use super::budget::{ApproxCounter, TokenBudget, TokenCounter};

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(3600);
pub const DEFAULT_TOKEN_LIMIT: u64 = 8000;
pub const DEFAULT_THRESHOLD: f64 = 0.7;
pub const DEFAULT_MAX_SUMMARIZATIONS: u32 = 3;
pub const DEFAULT_SETTLE_MS: u64 = 1000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone)]
pub struct SessionConfig {
    pub time_limit: Duration,
    pub token_limit: u64,
    pub threshold: f64,
    pub max_summarizations: u32,
    /// Settle window after the last action of a batch.
    pub settle_ms: u64,
    /// Offer swipe and rotate to the model.
    pub extended_actions: bool,
    pub trace_path: Option<PathBuf>,
    pub counter: Arc<dyn TokenCounter>,
}

impl std::fmt::Debug for SessionConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionConfig")
            .field("time_limit", &self.time_limit)
            .field("token_limit", &self.token_limit)
            .field("threshold", &self.threshold)
            .field("max_summarizations", &self.max_summarizations)
            .field("settle_ms", &self.settle_ms)
            .field("extended_actions", &self.extended_actions)
            .field("trace_path", &self.trace_path)
            .finish_non_exhaustive()
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
            token_limit: DEFAULT_TOKEN_LIMIT,
            threshold: DEFAULT_THRESHOLD,
            max_summarizations: DEFAULT_MAX_SUMMARIZATIONS,
            settle_ms: DEFAULT_SETTLE_MS,
            extended_actions: true,
            trace_path: None,
            counter: Arc::new(ApproxCounter),
        }
    }
}

/// TOML form of the session parameters; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub time_limit_seconds: Option<f64>,
    pub token_limit: Option<u64>,
    pub threshold: Option<f64>,
    pub max_summarizations: Option<u32>,
    pub action_settle_ms: Option<u64>,
    pub extended_actions: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        toml::from_str(&text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn apply(&self, config: &mut SessionConfig) -> Result<(), ConfigError> {
        if let Some(s) = self.time_limit_seconds {
            config.time_limit = seconds(s)?;
        }
        if let Some(v) = self.token_limit {
            config.token_limit = v;
        }
        if let Some(v) = self.threshold {
            config.threshold = v;
        }
        if let Some(v) = self.max_summarizations {
            config.max_summarizations = v;
        }
        if let Some(v) = self.action_settle_ms {
            config.settle_ms = v;
        }
        if let Some(v) = self.extended_actions {
            config.extended_actions = v;
        }
        Ok(())
    }
}

pub fn seconds(s: f64) -> Result<Duration, ConfigError> {
    if s.is_finite() && s > 0.0 {
        Ok(Duration::from_secs_f64(s))
    } else {
        Err(ConfigError::Invalid(format!("time limit must be a positive number of seconds, got {s}")))
    }
}

impl SessionConfig {
    pub fn budget(&self) -> Result<TokenBudget, ConfigError> {
        TokenBudget::new(self.token_limit, self.threshold, self.max_summarizations).map_err(ConfigError::Invalid)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.budget()?;
        if self.time_limit.is_zero() {
            return Err(ConfigError::Invalid("time limit must be positive".into()));
        }
        Ok(())
    }
}
