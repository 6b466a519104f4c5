use std::fmt;

use crate::model::Violation;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model is invalid: {}", ViolationList(.0))]
    InvalidModel(Vec<Violation>),

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("instantiation rejected at state {state}, action {action}: {reason}")]
    Instantiate {
        state: usize,
        action: usize,
        reason: String,
    },

    #[error("policy has no distribution for observation {0}")]
    MissingObservation(usize),

    #[error("policy for observation {observation} is invalid: {reason}")]
    InvalidPolicy { observation: usize, reason: String },

    #[error("empty uncertainty polytope (sum of lowers {lower_sum}, sum of uppers {upper_sum})")]
    EmptyPolytope { lower_sum: f64, upper_sum: f64 },

    #[error("state {0} cannot reach the goal set")]
    DeadEnd(usize),

    #[error("value iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("instance too large for {what}: {count} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("LP solve failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Syntax error in a text input, with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
