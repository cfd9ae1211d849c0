use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::{Signature, Term, DEFAULT_FUEL};
use crate::logic::Formula;
use crate::oracle::eval_at;
use crate::realizer::{p0, p1, p2, realizes_bounded, Bound, Candidates, Verdict};
use crate::states::KnowledgeState;

use super::play::{BMove, BPlay};
use super::tarski::{legal_moves, owner, Move, Player};
use super::{GResult, GameError};

/// An Eloise strategy of `1back(T_A)`: a function of the whole play so far.
pub trait EloiseStrategy: Send + Sync {
    fn choose(&self, play: &BPlay) -> GResult<BMove>;

    /// The knowledge state behind the next choice, for strategies that
    /// have one.
    fn knowledge(&self, _play: &BPlay) -> GResult<Option<KnowledgeState>> {
        Ok(None)
    }

    /// Runtime checks after each move of a run.
    fn audit(&self, _play: &BPlay) -> GResult<()> {
        Ok(())
    }
}

/// An Abelard strategy. Abelard never backtracks.
pub trait AbelardStrategy: Send {
    fn choose(&mut self, play: &BPlay, pos: &Formula) -> GResult<Move>;
}

/// The term a realizer `u` of the root assigns to the last position of the
/// play `moves`.
pub fn rho(u: &Term, root: &Formula, moves: &[Move]) -> GResult<Term> {
    let mut t = u.clone();
    let mut pos = root.clone();
    for mv in moves {
        t = match (&pos, mv) {
            (Formula::Exists(..), _) => Term::proj(1, t),
            (Formula::Forall(..), Move::Num(n)) => Term::app(t, Term::num(*n)),
            (Formula::And(..), Move::Left) => Term::proj(0, t),
            (Formula::And(..), Move::Right) => Term::proj(1, t),
            (Formula::Or(..), Move::Left) => p1(t),
            (Formula::Or(..), Move::Right) => p2(t),
            _ => return Err(GameError::illegal(None, format!("move {mv} does not fit `{pos}`"))),
        };
        pos = super::tarski::apply_move(&pos, *mv)?;
    }
    Ok(t)
}

/// Eloise's strategy read off a realizer `u` of the root formula.
///
/// At `∃` and `∨` she asks the realizer of the current position for its
/// choice at the current knowledge state. At a lost atom she adds what the
/// atom's realizer learns and returns to the first of her positions whose
/// choice changes under the new knowledge, or stays if none does.
pub struct RealizerStrategy {
    sig: Signature,
    root: Formula,
    u: Term,
    fuel: u64,
    /// Bound of the preservation check; `None` disables it.
    pub preservation: Option<Bound>,
    cache: Mutex<(Vec<Vec<Move>>, KnowledgeState)>,
}

impl RealizerStrategy {
    pub fn new(sig: &Signature, root: &Formula, u: &Term) -> RealizerStrategy {
        RealizerStrategy {
            sig: sig.clone(),
            root: root.clone(),
            u: u.clone(),
            fuel: DEFAULT_FUEL,
            preservation: None,
            cache: Mutex::new((vec![Vec::new()], KnowledgeState::empty())),
        }
    }

    pub fn with_preservation(mut self, bound: Bound) -> RealizerStrategy {
        self.preservation = Some(bound);
        self
    }

    fn eval(&self, t: &Term, s: &KnowledgeState) -> GResult<Term> {
        Ok(eval_at(&self.sig, t, s, self.fuel)?)
    }

    /// The state after a play: grows at each backtrack from an atom by what
    /// the atom's realizer learns.
    pub fn sigma(&self, play: &BPlay) -> GResult<KnowledgeState> {
        let mut cache = self.cache.lock().expect("cache lock");
        let (start, mut s) = if play.plays.starts_with(&cache.0) {
            (cache.0.len() - 1, cache.1.clone())
        } else {
            (0, KnowledgeState::empty())
        };
        for i in start..play.plays.len() - 1 {
            if let BMove::Backtrack { .. } = play.transition(i) {
                let from = &play.plays[i];
                if play.position_at(from)?.is_atomic() {
                    let t = rho(&self.u, &self.root, from)?;
                    s = s.cup(&self.state_of(&t, &s)?);
                }
            }
        }
        *cache = (play.plays.clone(), s.clone());
        Ok(s)
    }

    fn state_of(&self, t: &Term, s: &KnowledgeState) -> GResult<KnowledgeState> {
        let v = self.eval(t, s)?;
        v.as_state().cloned().ok_or_else(|| GameError::NotValue(v.to_string(), "state"))
    }

    /// The move the realizer `w` of `pos` recommends at state `s`.
    fn recommend(&self, w: &Term, pos: &Formula, s: &KnowledgeState) -> GResult<Move> {
        match pos {
            Formula::Exists(..) => {
                let v = self.eval(&Term::proj(0, w.clone()), s)?;
                v.as_num().map(Move::Num).ok_or_else(|| GameError::NotValue(v.to_string(), "numeral"))
            }
            Formula::Or(..) => {
                let v = self.eval(&p0(w.clone()), s)?;
                match v.as_bool() {
                    Some(true) => Ok(Move::Left),
                    Some(false) => Ok(Move::Right),
                    None => Err(GameError::NotValue(v.to_string(), "boolean")),
                }
            }
            _ => Err(GameError::illegal(Some(Player::Eloise), format!("`{pos}` is not an Eloise position"))),
        }
    }
}

impl EloiseStrategy for RealizerStrategy {
    fn choose(&self, play: &BPlay) -> GResult<BMove> {
        let s = self.sigma(play)?;
        let moves = play.current();
        let ps = play.current_positions()?;
        let last = ps.last().expect("non-empty");
        if owner(last) == Some(Player::Eloise) {
            let w = rho(&self.u, &self.root, moves)?;
            return Ok(BMove::Extend { mv: self.recommend(&w, last, &s)? });
        }
        if !last.is_atomic() {
            return Err(GameError::illegal(Some(Player::Eloise), "not Eloise's turn"));
        }
        let t = rho(&self.u, &self.root, moves)?;
        let next = s.cup(&self.state_of(&t, &s)?);
        for (j, pos) in ps.iter().enumerate().take(moves.len()) {
            if owner(pos) != Some(Player::Eloise) {
                continue;
            }
            let w = rho(&self.u, &self.root, &moves[..j])?;
            if self.recommend(&w, pos, &next)? != moves[j] {
                return Ok(BMove::Backtrack { keep: j });
            }
        }
        Ok(BMove::Backtrack { keep: moves.len() })
    }

    fn knowledge(&self, play: &BPlay) -> GResult<Option<KnowledgeState>> {
        self.sigma(play).map(Some)
    }

    fn audit(&self, play: &BPlay) -> GResult<()> {
        let Some(bound) = self.preservation else { return Ok(()) };
        let s = self.sigma(play)?;
        let t = rho(&self.u, &self.root, play.current())?;
        let pos = play.position()?;
        let v = realizes_bounded(&self.sig, &t, &pos, &s, bound, &Candidates::new())?;
        if let Verdict::Refuted { .. } = v {
            return Err(GameError::PreservationViolated(format!("at `{pos}` with state {s}: {v}")));
        }
        Ok(())
    }
}

/// Plays a fixed list of moves in order.
pub struct ScriptedAbelard {
    moves: VecDeque<Move>,
}

impl ScriptedAbelard {
    pub fn new<I: IntoIterator<Item = Move>>(moves: I) -> ScriptedAbelard {
        ScriptedAbelard { moves: moves.into_iter().collect() }
    }
}

impl AbelardStrategy for ScriptedAbelard {
    fn choose(&mut self, _play: &BPlay, _pos: &Formula) -> GResult<Move> {
        self.moves.pop_front().ok_or(GameError::ScriptExhausted)
    }
}

/// Abelard given by a function of the position and the play.
pub struct FnAbelard<F>(pub F);

impl<F> AbelardStrategy for FnAbelard<F>
where
    F: FnMut(&BPlay, &Formula) -> GResult<Move> + Send,
{
    fn choose(&mut self, play: &BPlay, pos: &Formula) -> GResult<Move> {
        (self.0)(play, pos)
    }
}

/// Uniformly random moves, numerals drawn from `0..=bound`.
pub struct RandomAbelard {
    rng: ChaCha8Rng,
    pub bound: u64,
}

impl RandomAbelard {
    pub fn new(seed: u64, bound: u64) -> RandomAbelard {
        RandomAbelard { rng: ChaCha8Rng::seed_from_u64(seed), bound }
    }
}

impl AbelardStrategy for RandomAbelard {
    fn choose(&mut self, _play: &BPlay, pos: &Formula) -> GResult<Move> {
        let ms = legal_moves(pos, self.bound)?;
        Ok(ms[self.rng.gen_range(0..ms.len())])
    }
}

/// Abelard moves supplied from outside, one at a time.
#[derive(Clone, Default)]
pub struct InteractiveAbelard {
    pending: Arc<Mutex<VecDeque<Move>>>,
}

impl InteractiveAbelard {
    pub fn new() -> InteractiveAbelard {
        InteractiveAbelard::default()
    }

    pub fn submit(&self, mv: Move) {
        self.pending.lock().expect("queue lock").push_back(mv);
    }
}

impl AbelardStrategy for InteractiveAbelard {
    fn choose(&mut self, _play: &BPlay, _pos: &Formula) -> GResult<Move> {
        self.pending.lock().expect("queue lock").pop_front().ok_or(GameError::AwaitingInput)
    }
}

/// Eloise given by a function of the play.
pub struct FnEloise<F>(pub F);

impl<F> EloiseStrategy for FnEloise<F>
where
    F: Fn(&BPlay) -> GResult<BMove> + Send + Sync,
{
    fn choose(&self, play: &BPlay) -> GResult<BMove> {
        (self.0)(play)
    }
}

/// Delays every backtrack of `inner` made away from an atom: Eloise plays
/// a fixed move instead until the play reaches an atom, then backtracks to
/// the target `inner` chose.
pub struct Delayed<S> {
    pub inner: S,
}

impl<S: EloiseStrategy> Delayed<S> {
    pub fn new(inner: S) -> Delayed<S> {
        Delayed { inner }
    }

    /// The play as `inner` sees it, and a backtrack target still pending.
    fn replay(&self, play: &BPlay) -> GResult<(BPlay, Option<usize>)> {
        let mut orig = BPlay::new(play.root.clone());
        let mut pending: Option<usize> = None;
        for i in 0..play.plays.len() - 1 {
            let m = play.transition(i);
            if let Some(keep) = pending {
                if m == (BMove::Backtrack { keep }) {
                    orig.plays.push(play.plays[i + 1].clone());
                    pending = None;
                }
                continue;
            }
            let ps = orig.current_positions()?;
            let last = ps.last().expect("non-empty");
            if owner(last) == Some(Player::Eloise) {
                if let BMove::Backtrack { keep } = self.inner.choose(&orig)? {
                    if matches!(m, BMove::Extend { .. }) {
                        pending = Some(keep);
                        continue;
                    }
                }
            }
            orig.plays.push(play.plays[i + 1].clone());
        }
        Ok((orig, pending))
    }
}

fn first_move(pos: &Formula) -> GResult<Move> {
    Ok(legal_moves(pos, 0)?[0])
}

impl<S: EloiseStrategy> EloiseStrategy for Delayed<S> {
    fn choose(&self, play: &BPlay) -> GResult<BMove> {
        let (orig, pending) = self.replay(play)?;
        let pos = play.position()?;
        if let Some(keep) = pending {
            return if pos.is_atomic() {
                Ok(BMove::Backtrack { keep })
            } else {
                Ok(BMove::Extend { mv: first_move(&pos)? })
            };
        }
        let m = self.inner.choose(&orig)?;
        match m {
            BMove::Backtrack { .. } if !pos.is_atomic() => Ok(BMove::Extend { mv: first_move(&pos)? }),
            _ => Ok(m),
        }
    }

    fn knowledge(&self, play: &BPlay) -> GResult<Option<KnowledgeState>> {
        let (orig, _) = self.replay(play)?;
        self.inner.knowledge(&orig)
    }
}
