use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("--set: {0}")]
    Override(String),

    #[error("invalid {field}: {constraint}")]
    Invalid {
        field: &'static str,
        constraint: String,
    },

    #[error(transparent)]
    Core(#[from] evh_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(field: &'static str, constraint: impl Into<String>) -> Self {
        Self::Invalid {
            field,
            constraint: constraint.into(),
        }
    }

    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) if e.is_numerical() => 3,
            Self::Io { .. } => 1,
            _ => 2,
        }
    }
}
