use std::path::PathBuf;

/// Errors surfaced by solvers, verification pipelines and IO.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),

    /// Validation collects every violated precondition, not just the first.
    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    ConfigList(Vec<String>),

    #[error("numerical abort at step {step}: {reason}")]
    Numerical { step: usize, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(step: usize, reason: impl Into<String>) -> Self {
        Error::Numerical {
            step,
            reason: reason.into(),
        }
    }

    /// Exit status contract: 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigList(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
