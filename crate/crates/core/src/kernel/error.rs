use thiserror::Error;

use super::{Name, Type};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("unknown constant `{0}`")]
    UnknownConstant(Name),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    TypeMismatch {
        expected: Type,
        found: Type,
        context: String,
    },
    #[error("{context}: `{found}` is not a function type")]
    NotAFunction { found: Type, context: String },
    #[error("{context}: `{found}` is not a product type")]
    NotAProduct { found: Type, context: String },
    #[error("reduction fuel exhausted after {limit} steps")]
    FuelExhausted { limit: u64 },
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("rule for `{constant}` failed: {msg}")]
    RuleFailure { constant: Name, msg: String },
    #[error("malformed application: {0}")]
    MalformedApplication(String),
    #[error("`{0}` is not a registered predicate")]
    NotAPredicate(Name),
    #[error("atom {0} is not true")]
    FalseAtom(String),
    #[error("inconsistent knowledge state: {0}")]
    InconsistentState(String),
    #[error("constant `{0}` is already defined")]
    DuplicateConstant(Name),
}

pub type KResult<T> = Result<T, KernelError>;
