use std::fmt;

use serde::Serialize;

/// One problem with a problem file, tied to the field that caused it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub index: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            index: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, index: impl Into<String>) -> Self {
        self.index = Some(index.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            Some(i) => write!(f, "{}[{}]: {}", self.field, i, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid problem: {}", join(.0))]
    Validation(Vec<Diagnostic>),

    #[error("memoization requested but {0} is keyed by node, not by belief")]
    MemoizationUnsound(String),

    #[error("beliefs depend on the strategy profile (deviation {deviation:.3e} at node {node}); rerun with --force to solve anyway")]
    AssumptionViolation { deviation: f64, node: String },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("{what} too large: {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: f64,
        limit: f64,
    },

    #[error("solution does not match the problem: {0}")]
    UnknownNode(String),

    #[error("solution is not solved (infeasible at {0})")]
    Unsolved(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
