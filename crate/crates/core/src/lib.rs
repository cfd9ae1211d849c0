//! Learning-based realizability for classical arithmetic.
//!
//! The crate provides a typed term calculus with oracle constants, knowledge
//! states, the zero loop that finds stable states, a natural deduction
//! checker with realizer extraction, 1-backtracking Tarski games, continuous
//! models with moduli of convergence and transfinite update procedures.

pub mod convergence;
pub mod corpus;
pub mod games;
pub mod kernel;
pub mod logic;
pub mod oracle;
pub mod realizer;
pub mod sexp;
pub mod states;
pub mod update;
