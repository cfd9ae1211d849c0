use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::Signature;
use crate::logic::Formula;

use super::tarski::{apply_move, atom_value, owner, positions, Move, Player};
use super::{GResult, GameError};

/// A move of the 1-backtracking game: extend the current play of the
/// Tarski game, or return to one of its prefixes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BMove {
    Extend { mv: Move },
    /// Return to the prefix with `keep` moves.
    Backtrack { keep: usize },
}

impl fmt::Display for BMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BMove::Extend { mv } => write!(f, "{mv}"),
            BMove::Backtrack { keep } => write!(f, "backtrack to {keep}"),
        }
    }
}

/// Whose turn it is in a 1-backtracking position.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "turn", content = "winner", rename_all = "lowercase")]
pub enum Turn {
    Eloise,
    Abelard,
    Over(Player),
}

/// A play of `1back(T_A)`: a sequence of plays of `T_A`, each given by its
/// moves from the root.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BPlay {
    pub root: Formula,
    pub plays: Vec<Vec<Move>>,
}

impl BPlay {
    pub fn new(root: Formula) -> BPlay {
        BPlay { root, plays: vec![Vec::new()] }
    }

    pub fn current(&self) -> &[Move] {
        self.plays.last().expect("a 1-backtracking play is never empty")
    }

    pub fn position(&self) -> GResult<Formula> {
        self.position_at(self.current())
    }

    pub fn position_at(&self, moves: &[Move]) -> GResult<Formula> {
        let mut pos = self.root.clone();
        for mv in moves {
            pos = apply_move(&pos, *mv)?;
        }
        Ok(pos)
    }

    /// Positions of the current play of `T_A`.
    pub fn current_positions(&self) -> GResult<Vec<Formula>> {
        positions(&self.root, self.current())
    }

    /// Number of backtracking moves so far.
    pub fn backtracks(&self) -> usize {
        self.plays.windows(2).filter(|w| w[1].len() <= w[0].len()).count()
    }

    /// The move leading from `plays[i]` to `plays[i + 1]`.
    pub fn transition(&self, i: usize) -> BMove {
        let (a, b) = (&self.plays[i], &self.plays[i + 1]);
        if b.len() == a.len() + 1 && b.starts_with(a) {
            BMove::Extend { mv: *b.last().expect("non-empty") }
        } else {
            BMove::Backtrack { keep: b.len() }
        }
    }

    /// The 1-backtracking play up to and including `plays[i]`.
    pub fn prefix(&self, i: usize) -> BPlay {
        BPlay { root: self.root.clone(), plays: self.plays[..=i].to_vec() }
    }

    pub fn turn(&self, sig: &Signature, fuel: u64) -> GResult<Turn> {
        let ps = self.current_positions()?;
        let last = ps.last().expect("non-empty");
        match owner(last) {
            Some(Player::Eloise) => Ok(Turn::Eloise),
            Some(Player::Abelard) => Ok(Turn::Abelard),
            None => {
                if let Formula::Implies(..) = last {
                    return Err(GameError::NotImplicationFree(last.to_string()));
                }
                if atom_value(sig, last, fuel)? {
                    Ok(Turn::Over(Player::Eloise))
                } else if ps.iter().any(|p| owner(p) == Some(Player::Eloise)) {
                    Ok(Turn::Eloise)
                } else {
                    Ok(Turn::Over(Player::Abelard))
                }
            }
        }
    }

    /// Checks that `player` may play `m` here.
    pub fn check(&self, sig: &Signature, fuel: u64, player: Player, m: BMove) -> GResult<()> {
        let turn = self.turn(sig, fuel)?;
        let expected = match turn {
            Turn::Over(_) => return Err(GameError::GameOver),
            Turn::Eloise => Player::Eloise,
            Turn::Abelard => Player::Abelard,
        };
        if player != expected {
            return Err(GameError::illegal(Some(player), "not this player's turn"));
        }
        let ps = self.current_positions()?;
        let last = ps.last().expect("non-empty");
        match m {
            BMove::Extend { mv } => {
                if owner(last) != Some(player) {
                    return Err(GameError::illegal(Some(player), format!("`{last}` is not owned by {player}")));
                }
                apply_move(last, mv).map_err(|e| GameError::illegal(Some(player), e.to_string()))?;
                Ok(())
            }
            BMove::Backtrack { keep } => {
                if player != Player::Eloise {
                    return Err(GameError::illegal(Some(player), "only Eloise backtracks"));
                }
                if keep >= ps.len() {
                    return Err(GameError::illegal(Some(player), format!("no prefix with {keep} moves")));
                }
                let target = &ps[keep];
                // Returning to the current position is a backtrack with an
                // empty abandoned segment; at a lost atom it keeps the game
                // going while Eloise revises her knowledge.
                let self_at_atom = keep + 1 == ps.len() && target.is_atomic();
                if owner(target) != Some(Player::Eloise) && !self_at_atom {
                    return Err(GameError::illegal(
                        Some(player),
                        format!("`{target}` is not an Eloise position"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Plays `m` for `player` after checking legality.
    pub fn play(&mut self, sig: &Signature, fuel: u64, player: Player, m: BMove) -> GResult<()> {
        self.check(sig, fuel, player, m)?;
        let next = match m {
            BMove::Extend { mv } => {
                let mut p = self.current().to_vec();
                p.push(mv);
                p
            }
            BMove::Backtrack { keep } => self.current()[..keep].to_vec(),
        };
        self.plays.push(next);
        Ok(())
    }
}

/// Numeric codes of 1-backtracking plays.
///
/// A play is written as its sequence of transitions: an extension by a move
/// of index `i` is the digit `2i`, a backtrack to the prefix with `k` moves
/// is `2k + 1`. The code is `1` followed by these digits in base 64, so that
/// leading transitions are never lost. Plays of `T_A` are coded as the
/// 1-backtracking play that extends move by move.
pub mod code {
    use super::*;

    pub const BASE: u64 = 64;
    /// Longest transition sequence that fits a `u64` code.
    pub const MAX_EVENTS: usize = 10;

    fn digit(m: BMove) -> GResult<u64> {
        let d = match m {
            BMove::Extend { mv } => mv.index().checked_mul(2),
            BMove::Backtrack { keep } => (keep as u64).checked_mul(2).map(|k| k + 1),
        };
        d.filter(|d| *d < BASE).ok_or(GameError::CodeOverflow)
    }

    pub fn push(code: u64, m: BMove) -> GResult<u64> {
        let d = digit(m)?;
        if code >= 1 << (64 - 6 - 3) {
            return Err(GameError::CodeOverflow);
        }
        Ok(code * BASE + d)
    }

    pub fn encode_moves(moves: &[BMove]) -> GResult<u64> {
        if moves.len() > MAX_EVENTS {
            return Err(GameError::CodeOverflow);
        }
        moves.iter().try_fold(1, |c, m| push(c, *m))
    }

    /// The transitions of a code; `None` when the code is malformed.
    pub fn decode_moves(code: u64) -> Option<Vec<BMove>> {
        if code == 0 {
            return None;
        }
        let mut digits = Vec::new();
        let mut c = code;
        while c > 1 {
            digits.push(c % BASE);
            c /= BASE;
        }
        if c != 1 {
            return None;
        }
        digits.reverse();
        Some(
            digits
                .into_iter()
                .map(|d| {
                    if d % 2 == 0 {
                        BMove::Extend { mv: Move::Num(d / 2) }
                    } else {
                        BMove::Backtrack { keep: (d / 2) as usize }
                    }
                })
                .collect(),
        )
    }

    /// Code of a 1-backtracking play.
    pub fn encode(p: &BPlay) -> GResult<u64> {
        let moves: Vec<BMove> = (0..p.plays.len() - 1).map(|i| p.transition(i)).collect();
        encode_moves(&moves)
    }

    /// Code of a play of `T_A`.
    pub fn encode_play(moves: &[Move]) -> GResult<u64> {
        let ms: Vec<BMove> = moves.iter().map(|mv| BMove::Extend { mv: *mv }).collect();
        encode_moves(&ms)
    }

    /// Rebuilds a 1-backtracking play over `root`; move indices are resolved
    /// against the positions they are played at. Structural validity is
    /// checked, legality is not.
    pub fn decode(root: &Formula, code: u64) -> Option<BPlay> {
        let moves = decode_moves(code)?;
        let mut p = BPlay::new(root.clone());
        for m in moves {
            let cur = p.current().to_vec();
            let next = match m {
                BMove::Extend { mv } => {
                    let pos = p.position_at(&cur).ok()?;
                    let mv = Move::from_index(&pos, mv.index()).ok()?;
                    apply_move(&pos, mv).ok()?;
                    let mut n = cur;
                    n.push(mv);
                    n
                }
                BMove::Backtrack { keep } if keep <= cur.len() => cur[..keep].to_vec(),
                BMove::Backtrack { .. } => return None,
            };
            p.plays.push(next);
        }
        Some(p)
    }

    pub fn decode_play(root: &Formula, code: u64) -> Option<Vec<Move>> {
        let p = decode(root, code)?;
        if p.backtracks() > 0 {
            return None;
        }
        Some(p.current().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::logic::Document;

    fn em1() -> (Document, Formula) {
        let d = Document::parse(corpus::EM1).unwrap();
        let a = d.main().unwrap().formula.clone();
        (d, a)
    }

    #[test]
    fn turns_and_backtrack_legality() {
        let (d, a) = em1();
        let mut p = BPlay::new(a);
        assert_eq!(p.turn(&d.sig, 1000).unwrap(), Turn::Abelard);
        assert!(p.check(&d.sig, 1000, Player::Eloise, BMove::Extend { mv: Move::Num(4) }).is_err());
        p.play(&d.sig, 1000, Player::Abelard, BMove::Extend { mv: Move::Num(4) }).unwrap();
        assert_eq!(p.turn(&d.sig, 1000).unwrap(), Turn::Eloise);
        p.play(&d.sig, 1000, Player::Eloise, BMove::Extend { mv: Move::Right }).unwrap();
        // Eloise cannot backtrack at an Abelard position.
        assert!(p.check(&d.sig, 1000, Player::Eloise, BMove::Backtrack { keep: 1 }).is_err());
        p.play(&d.sig, 1000, Player::Abelard, BMove::Extend { mv: Move::Num(2) }).unwrap();
        assert_eq!(p.turn(&d.sig, 1000).unwrap(), Turn::Eloise);
        assert!(p.check(&d.sig, 1000, Player::Eloise, BMove::Backtrack { keep: 0 }).is_err());
        p.play(&d.sig, 1000, Player::Eloise, BMove::Backtrack { keep: 1 }).unwrap();
        assert_eq!(p.backtracks(), 1);
        p.play(&d.sig, 1000, Player::Eloise, BMove::Extend { mv: Move::Left }).unwrap();
        p.play(&d.sig, 1000, Player::Eloise, BMove::Extend { mv: Move::Num(2) }).unwrap();
        assert_eq!(p.turn(&d.sig, 1000).unwrap(), Turn::Over(Player::Eloise));
        assert!(matches!(
            p.check(&d.sig, 1000, Player::Eloise, BMove::Backtrack { keep: 1 }),
            Err(GameError::GameOver)
        ));

        let c = code::encode(&p).unwrap();
        assert_eq!(code::decode(&p.root, c).unwrap(), p);
    }

    #[test]
    fn false_atom_without_eloise_positions_is_lost() {
        let d = Document::parse("").unwrap();
        let a = d.parse_formula("(all x (atom lt x 3))").unwrap();
        let mut p = BPlay::new(a);
        p.play(&d.sig, 1000, Player::Abelard, BMove::Extend { mv: Move::Num(5) }).unwrap();
        assert_eq!(p.turn(&d.sig, 1000).unwrap(), Turn::Over(Player::Abelard));
    }

    #[test]
    fn codes_reject_overflow() {
        assert!(matches!(code::encode_play(&[Move::Num(32)]), Err(GameError::CodeOverflow)));
        assert!(matches!(code::encode_play(&[Move::Num(1); 11]), Err(GameError::CodeOverflow)));
        assert_eq!(code::decode_moves(1).unwrap(), vec![]);
        assert!(code::decode_moves(0).is_none());
    }
}
