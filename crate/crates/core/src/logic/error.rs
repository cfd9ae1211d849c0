use thiserror::Error;

use crate::kernel::{KernelError, Name};
use crate::sexp::SexpError;

use super::post::PostError;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("eigenvariable condition violated for `{var}`: {msg}")]
    EigenvariableViolation { var: Name, msg: String },
    #[error("rule {rule} does not apply: {msg}")]
    RuleMismatch { rule: &'static str, msg: String },
    #[error("premise {index} of Post rule `{rule}` is not atomic")]
    NonAtomicPostPremise { rule: Name, index: usize },
    #[error("hypothesis `{0}` is neither discharged nor given a formula")]
    UnboundHypothesis(Name),
    #[error("name `{0}` is used both as a hypothesis label and as an individual variable")]
    NameClash(Name),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Post(#[from] PostError),
}

impl From<SexpError> for LogicError {
    fn from(e: SexpError) -> Self {
        LogicError::Syntax { line: e.line, col: e.col, msg: e.msg }
    }
}

impl LogicError {
    pub fn mismatch(rule: &'static str, msg: impl Into<String>) -> LogicError {
        LogicError::RuleMismatch { rule, msg: msg.into() }
    }
}

pub type LResult<T> = Result<T, LogicError>;
