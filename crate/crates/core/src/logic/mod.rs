//! Formulas, natural deduction proofs and their checker.

mod check;
mod document;
mod error;
mod formula;
pub mod post;
mod proof;
mod taut;

pub use check::{check_proof, realizer_ctx, Checked};
pub use document::{Document, Macro, Overrides, Theorem};
pub use error::{LResult, LogicError};
pub use formula::{normal_atom, print_formula, unfold, Formula};
pub use post::{is_atomic_axiom, Pat, PostError, PostKind, PostRule, PostTable};
pub use proof::{print_proof, Proof};
pub use taut::{is_tautological_consequence, TautError};
