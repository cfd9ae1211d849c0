//! Command line front end and HTTP game service over `lbr-core`.

pub mod cli;
pub mod load;
pub mod service;

use thiserror::Error;

use lbr_core::convergence::ConvergenceError;
use lbr_core::games::GameError;
use lbr_core::logic::LogicError;
use lbr_core::oracle::OracleError;
use lbr_core::realizer::RealizerError;
use lbr_core::update::UpdateError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Realizer(#[from] RealizerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
