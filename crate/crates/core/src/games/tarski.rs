use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{normalize_with_fuel, Signature};
use crate::logic::Formula;

use super::{GResult, GameError};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Eloise,
    Abelard,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Eloise => Player::Abelard,
            Player::Abelard => Player::Eloise,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Eloise => "eloise",
            Player::Abelard => "abelard",
        })
    }
}

/// A move in a Tarski game: a side of a connective or a numeral for a
/// quantifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Left,
    Right,
    Num(u64),
}

impl Move {
    /// Index of the move among the alternatives at its position.
    pub fn index(self) -> u64 {
        match self {
            Move::Left => 0,
            Move::Right => 1,
            Move::Num(n) => n,
        }
    }

    /// The move with the given index at `pos`.
    pub fn from_index(pos: &Formula, i: u64) -> GResult<Move> {
        match pos {
            Formula::Forall(..) | Formula::Exists(..) => Ok(Move::Num(i)),
            Formula::And(..) | Formula::Or(..) if i < 2 => Ok(if i == 0 { Move::Left } else { Move::Right }),
            Formula::And(..) | Formula::Or(..) => Err(GameError::illegal(None, format!("no side {i} at `{pos}`"))),
            Formula::Atom(_) => Err(GameError::AtomicPosition),
            Formula::Implies(..) => Err(GameError::NotImplicationFree(pos.to_string())),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Left => f.write_str("left"),
            Move::Right => f.write_str("right"),
            Move::Num(n) => write!(f, "{n}"),
        }
    }
}

/// Who moves at a non-atomic position: Eloise on `∃` and `∨`, Abelard on
/// `∀` and `∧`. Atoms belong to nobody.
pub fn owner(pos: &Formula) -> Option<Player> {
    match pos {
        Formula::Exists(..) | Formula::Or(..) => Some(Player::Eloise),
        Formula::Forall(..) | Formula::And(..) => Some(Player::Abelard),
        Formula::Atom(_) | Formula::Implies(..) => None,
    }
}

/// Moves available at `pos`; quantifiers list the numerals `0..=bound`.
pub fn legal_moves(pos: &Formula, bound: u64) -> GResult<Vec<Move>> {
    match pos {
        Formula::Atom(_) => Err(GameError::AtomicPosition),
        Formula::Implies(..) => Err(GameError::NotImplicationFree(pos.to_string())),
        Formula::And(..) | Formula::Or(..) => Ok(vec![Move::Left, Move::Right]),
        Formula::Forall(..) | Formula::Exists(..) => Ok((0..=bound).map(Move::Num).collect()),
    }
}

/// The position reached from `pos` by `mv`.
pub fn apply_move(pos: &Formula, mv: Move) -> GResult<Formula> {
    match (pos, mv) {
        (Formula::Atom(_), _) => Err(GameError::AtomicPosition),
        (Formula::Implies(..), _) => Err(GameError::NotImplicationFree(pos.to_string())),
        (Formula::And(a, _) | Formula::Or(a, _), Move::Left) => Ok((**a).clone()),
        (Formula::And(_, b) | Formula::Or(_, b), Move::Right) => Ok((**b).clone()),
        (Formula::Forall(..) | Formula::Exists(..), Move::Num(n)) => {
            Ok(pos.instantiate(n).expect("quantified formula"))
        }
        _ => Err(GameError::illegal(None, format!("move {mv} does not fit `{pos}`"))),
    }
}

/// The positions visited by a sequence of moves from `root`, starting with
/// `root` itself.
pub fn positions(root: &Formula, moves: &[Move]) -> GResult<Vec<Formula>> {
    let mut out = Vec::with_capacity(moves.len() + 1);
    out.push(root.clone());
    for mv in moves {
        let next = apply_move(out.last().expect("non-empty"), *mv)?;
        out.push(next);
    }
    Ok(out)
}

/// Truth value of a closed atomic position.
pub fn atom_value(sig: &Signature, pos: &Formula, fuel: u64) -> GResult<bool> {
    let t = pos.as_atom().ok_or(GameError::NotAtomic(pos.to_string()))?;
    let (v, _) = normalize_with_fuel(sig, t, fuel)?;
    v.as_bool().ok_or_else(|| GameError::NotAtomic(format!("`{pos}` does not evaluate to a boolean")))
}

/// Checks that `a` can be played: closed and without implications.
pub fn check_game_formula(a: &Formula) -> GResult<()> {
    if !a.is_implication_free() {
        return Err(GameError::NotImplicationFree(a.to_string()));
    }
    if !a.is_closed() {
        return Err(GameError::NotClosed(a.to_string()));
    }
    Ok(())
}
