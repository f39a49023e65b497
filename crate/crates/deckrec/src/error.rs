//! Errors of the command layer and their mapping to exit codes.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code when an assertable check fails.
pub const EXIT_CHECK: i32 = 1;
/// Exit code for bad input, configuration or usage.
pub const EXIT_INPUT: i32 = 2;

/// Failures of file handling and command validation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Reading or writing a file failed.
    #[error("{}: {source}", path.display())]
    Io {
        /// File concerned.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// A file could not be parsed.
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        /// File concerned.
        path: PathBuf,
        /// One-based line number, when known.
        line: Option<usize>,
        /// What was wrong.
        message: String,
    },
    /// A configuration value is missing or out of range.
    #[error("config: {0}")]
    Config(String),
    /// The library rejected the request.
    #[error(transparent)]
    Core(#[from] deckrec_core::Error),
    /// An assertable check failed.
    #[error("check failed: {0}")]
    Check(String),
}

/// Result alias for the command layer.
pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Parse error at a line of a file.
    pub fn parse(path: &Path, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }

    /// Missing or invalid configuration key.
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) | CliError::Core(deckrec_core::Error::InvariantViolation(_)) => EXIT_CHECK,
            _ => EXIT_INPUT,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Core(deckrec_core::Error::InvariantViolation(_)) => "invariant",
            CliError::Core(_) => "invalid-input",
            CliError::Check(_) => "check",
        }
    }

    /// The error document printed by the command-line driver.
    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Io { path, .. } => {
                body["path"] = json!(path.display().to_string());
            }
            CliError::Parse { path, line, .. } => {
                body["path"] = json!(path.display().to_string());
                if let Some(l) = line {
                    body["line"] = json!(l);
                }
            }
            _ => {}
        }
        json!({ "error": body })
    }
}
