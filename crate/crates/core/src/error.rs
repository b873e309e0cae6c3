use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map step produced a non-finite value")]
    NonFiniteResult,
    #[error("non-finite input coordinate")]
    NonFiniteInput,
    #[error("map `{0}` provides no Jacobian")]
    NoJacobian(String),
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("transition table is empty")]
    EmptyCounts,
    #[error("expected {expected} parameter value(s), got {found}")]
    ParamCount { expected: usize, found: usize },
    #[error("expected a {expected}-dimensional state, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("expected {expected} component expression(s), got {found}")]
    Arity { expected: usize, found: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("map file line {line}: {message}")]
    MapFile { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Syntax error in a DSL expression. `position` is a 1-based character index.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub position: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at position {}: found {}", self.position, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(" "))?;
        }
        Ok(())
    }
}
