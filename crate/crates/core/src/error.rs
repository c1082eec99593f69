use std::path::PathBuf;

use thiserror::Error;

/// Configuration problems. All of these are reported before any simulation work starts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),
    #[error("cannot use `{value}` as a value for `{path}`")]
    BadValue { path: String, value: String },
    #[error("override `{0}` is not of the form path=value")]
    MalformedOverride(String),
    #[error("unknown scenario `{0}` (expected baseline, 1, 2 or 3)")]
    UnknownScenario(String),
    #[error("cannot parse value list `{0}`")]
    BadValueList(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read config file {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write to output directory {path}: {source}")]
    OutputDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the user's configuration or paths rather than a runtime failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::ReadConfig { .. } | Error::OutputDir { .. }
        )
    }
}
