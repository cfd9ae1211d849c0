//! Tarski games, their 1-backtracking versions, the Eloise strategy read
//! off a realizer, and the way back from winning strategies to realizers.

mod completeness;
mod engine;
mod play;
mod strategy;
mod tarski;

use thiserror::Error;

use crate::kernel::KernelError;
use crate::oracle::OracleError;
use crate::realizer::RealizerError;

pub use completeness::{strategy_to_realizer, LearningStrategy, Realized, E_PRED};
pub use engine::{run_1back, Game, Record, Transcript};
pub use play::{code, BMove, BPlay, Turn};
pub use strategy::{
    rho, AbelardStrategy, Delayed, EloiseStrategy, FnAbelard, FnEloise, InteractiveAbelard, RandomAbelard,
    RealizerStrategy, ScriptedAbelard,
};
pub use tarski::{apply_move, atom_value, check_game_formula, legal_moves, owner, positions, Move, Player};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("atomic positions have no moves")]
    AtomicPosition,
    #[error("`{0}` is not atomic")]
    NotAtomic(String),
    #[error("games are played on implication-free formulas; `{0}` is not")]
    NotImplicationFree(String),
    #[error("games are played on closed formulas; `{0}` is not")]
    NotClosed(String),
    #[error("illegal move{}: {reason}", .player.map(|p| format!(" by {p}")).unwrap_or_default())]
    IllegalMove { player: Option<Player>, reason: String },
    #[error("the game is over")]
    GameOver,
    #[error("no winner after {0} moves")]
    MoveBudgetExceeded(usize),
    #[error("the Abelard script ran out of moves")]
    ScriptExhausted,
    #[error("waiting for an Abelard move")]
    AwaitingInput,
    #[error("play does not fit a numeric code")]
    CodeOverflow,
    #[error("strategy is not total: {0}")]
    NonTotalStrategy(String),
    #[error("realizer lost the current position: {0}")]
    PreservationViolated(String),
    #[error("`{0}` did not evaluate to a {1}")]
    NotValue(String, &'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Realizer(#[from] RealizerError),
}

impl From<KernelError> for GameError {
    fn from(e: KernelError) -> Self {
        GameError::Oracle(e.into())
    }
}

impl GameError {
    pub fn illegal(player: Option<Player>, reason: impl Into<String>) -> GameError {
        GameError::IllegalMove { player, reason: reason.into() }
    }
}

pub type GResult<T> = Result<T, GameError>;
