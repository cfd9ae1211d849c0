//! Update procedures over ordinal-indexed families of functions, the
//! learning processes they generate, bar-recursive zero finders and the
//! epsilon substitution method for first-order critical formulas.

mod bar;
mod epsilon;
mod file;
mod ordinal;
mod procedure;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::logic::LogicError;

pub use bar::{zero_br, BarZero};
pub use epsilon::{
    critical_update_procedure, eps_normalize, h_process, Critical, CriticalSet, Eps, EpsContext, EpsSubstitution,
    HProcess,
};
pub use file::{parse_procedure, parse_procedures};
pub use ordinal::{weakly_increasing, Family, OrdCode, Ordinal, Update};
pub use procedure::{
    decode_update, encode_update, learning_process, oplus_flat, oplus_transfinite, validate, CmpOp, Expr,
    LearningRun, Mode, ProbeConfig, Rule, TraceStep, UpdateProcedure, ValidationReport, Violation,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UpdateError {
    #[error("no zero after {steps} steps (next update {last})")]
    StepBudgetExceeded { steps: usize, last: String },
    #[error("fuel exhausted after {limit} evaluations")]
    FuelExhausted { limit: u64 },
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("malformed critical formula {0}")]
    MalformedCritical(String),
    #[error("`{0}` is not a canonical epsilon term")]
    NotCanonical(String),
    #[error("cannot evaluate `{0}`")]
    NotEvaluable(String),
    #[error("not a zero: {0}")]
    NotAZero(String),
    #[error("{0}")]
    Shape(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

pub type UResult<T> = Result<T, UpdateError>;
