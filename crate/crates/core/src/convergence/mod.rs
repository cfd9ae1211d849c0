//! Moduli of convergence and the model of hypernaturals with moduli, in
//! which every term of System T over a weakly increasing chain of
//! functions denotes a convergent sequence together with its modulus.

mod model;
mod modulus;
mod zero;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::oracle::OracleError;

pub use model::{h_lift, interpret, next_stable, numeral, phi, phi_at, render, FunChain, StarValue, PHI};
pub use modulus::{check_modulus, h1_merge, Fun, Modulus, Points, ReportRow, SamplePolicy};
pub use zero::{interpret_along_states, zero_via_moduli, ModuliZero, StateCoding};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConvergenceError {
    #[error("cannot interpret `{0}`")]
    Unsupported(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("expected {0}")]
    Shape(&'static str),
    #[error("`{0}` is not a closed atomic value")]
    NotAtomic(String),
    #[error("chain is not weakly increasing at index {index}, argument {arg}")]
    ChainNotMonotone { index: u64, arg: u64 },
    #[error("modulus gave no zero: {0}")]
    ZeroFailed(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub type CResult<T> = Result<T, ConvergenceError>;
