use std::io::Write;

use serde::Serialize;

use crate::kernel::{Signature, DEFAULT_FUEL};
use crate::logic::Formula;
use crate::states::KnowledgeState;

use super::play::{BMove, BPlay, Turn};
use super::strategy::{AbelardStrategy, EloiseStrategy};
use super::tarski::{check_game_formula, Player};
use super::{GResult, GameError};

/// One move of a transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub index: usize,
    pub player: Player,
    #[serde(rename = "move")]
    pub mv: BMove,
    /// Position reached by the move.
    pub position: String,
    /// Eloise's knowledge after the move, when her strategy has one.
    pub knowledge: Option<KnowledgeState>,
    /// Prefix length of a backtrack.
    pub backtrack: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub formula: String,
    pub winner: Player,
    pub records: Vec<Record>,
    pub backtracks: usize,
    pub knowledge: Option<KnowledgeState>,
    #[serde(skip)]
    pub play: BPlay,
}

impl Transcript {
    /// Writes one JSON object per record.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// A game of `1back(T_A)` in progress. Legality of every move is checked
/// against the rules of the game, whoever proposes it.
#[derive(Clone, Debug)]
pub struct Game {
    sig: Signature,
    pub play: BPlay,
    pub records: Vec<Record>,
    pub fuel: u64,
}

impl Game {
    pub fn new(sig: &Signature, a: &Formula) -> GResult<Game> {
        check_game_formula(a)?;
        Ok(Game { sig: sig.clone(), play: BPlay::new(a.clone()), records: Vec::new(), fuel: DEFAULT_FUEL })
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn turn(&self) -> GResult<Turn> {
        self.play.turn(&self.sig, self.fuel)
    }

    pub fn apply(&mut self, player: Player, m: BMove, knowledge: Option<KnowledgeState>) -> GResult<&Record> {
        self.play.play(&self.sig, self.fuel, player, m)?;
        let position = self.play.position()?.to_string();
        let backtrack = match m {
            BMove::Backtrack { keep } => Some(keep),
            BMove::Extend { .. } => None,
        };
        self.records.push(Record { index: self.records.len(), player, mv: m, position, knowledge, backtrack });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Lets Eloise move once.
    pub fn eloise_step(&mut self, eloise: &dyn EloiseStrategy) -> GResult<&Record> {
        let m = eloise.choose(&self.play)?;
        let mut next = self.play.clone();
        next.play(&self.sig, self.fuel, Player::Eloise, m)?;
        let k = eloise.knowledge(&next)?;
        self.apply(Player::Eloise, m, k)?;
        eloise.audit(&self.play)?;
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn abelard_step(&mut self, abelard: &mut dyn AbelardStrategy) -> GResult<&Record> {
        let pos = self.play.position()?;
        let mv = abelard.choose(&self.play, &pos)?;
        self.apply(Player::Abelard, BMove::Extend { mv }, None)
    }

    pub fn transcript(&self, winner: Player, eloise: &dyn EloiseStrategy) -> GResult<Transcript> {
        Ok(Transcript {
            formula: self.play.root.to_string(),
            winner,
            records: self.records.clone(),
            backtracks: self.play.backtracks(),
            knowledge: eloise.knowledge(&self.play)?,
            play: self.play.clone(),
        })
    }
}

/// Plays `1back(T_A)` to the end. Fails when the game needs more than
/// `max_moves` moves or a strategy proposes an illegal move.
pub fn run_1back(
    sig: &Signature,
    a: &Formula,
    eloise: &dyn EloiseStrategy,
    abelard: &mut dyn AbelardStrategy,
    max_moves: usize,
) -> GResult<Transcript> {
    let mut g = Game::new(sig, a)?;
    eloise.audit(&g.play)?;
    loop {
        match g.turn()? {
            Turn::Over(w) => return g.transcript(w, eloise),
            _ if g.records.len() >= max_moves => return Err(GameError::MoveBudgetExceeded(max_moves)),
            Turn::Eloise => {
                g.eloise_step(eloise)?;
            }
            Turn::Abelard => {
                g.abelard_step(abelard)?;
            }
        }
    }
}
