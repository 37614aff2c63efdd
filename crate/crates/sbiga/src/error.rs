//! Harness errors and their exit codes.

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] sbiga_core::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Schema { .. } => 2,
            _ => 1,
        }
    }

    pub fn diagnostic(&self) -> Diagnostic {
        match self {
            HarnessError::Schema { path, reason } => {
                Diagnostic { error: "schema-error".into(), message: reason.clone(), path: Some(path.clone()) }
            }
            HarnessError::Io(m) => Diagnostic { error: "io-error".into(), message: m.clone(), path: None },
            HarnessError::Core(e) => Diagnostic { error: e.kind().into(), message: e.to_string(), path: None },
            HarnessError::ChecksFailed(_) => {
                Diagnostic { error: "check-failed".into(), message: self.to_string(), path: None }
            }
        }
    }
}
