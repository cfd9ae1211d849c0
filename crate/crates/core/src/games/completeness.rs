use std::sync::Arc;

use crate::kernel::{print_term, KernelError, Name, Signature, Term, Type, DEFAULT_FUEL};
use crate::logic::Formula;
use crate::oracle::OracleTerm;
use crate::states::{Atom, KnowledgeState};

use super::play::{code, BMove, BPlay, Turn};
use super::strategy::{Delayed, EloiseStrategy};
use super::tarski::{check_game_formula, owner, Move, Player};
use super::{GResult, GameError};

/// Name of the improvement predicate: `E(n0, n1)` holds when `n1` codes an
/// improvement of the play coded by `n0`.
pub const E_PRED: &str = "E";

/// The learning strategy of `T_A` built from a winning strategy `ω` of
/// `1back(T_A)`. Its oracles answer whether a play of `1back(T_A)` can be
/// improved; they are approximated by the `E` atoms of a knowledge state.
pub struct LearningStrategy {
    pub root: Formula,
    sig: Signature,
    omega: Box<dyn EloiseStrategy>,
    fuel: u64,
    /// Bound on the improvement steps of one call of `Ψ`.
    pub max_improvements: usize,
}

impl LearningStrategy {
    /// `omega` is first normalised so that it backtracks only at atoms.
    pub fn new<S: EloiseStrategy + 'static>(sig: &Signature, root: &Formula, omega: S) -> GResult<LearningStrategy> {
        check_game_formula(root)?;
        Ok(LearningStrategy {
            root: root.clone(),
            sig: sig.clone(),
            omega: Box::new(Delayed::new(omega)),
            fuel: DEFAULT_FUEL,
            max_improvements: 10_000,
        })
    }

    pub fn omega(&self) -> &dyn EloiseStrategy {
        &*self.omega
    }

    /// Every Eloise transition of `p` is the one `ω` chooses and every
    /// Abelard transition is legal.
    pub fn omega_correct(&self, p: &BPlay) -> GResult<bool> {
        let mut q = BPlay::new(p.root.clone());
        for i in 0..p.plays.len() - 1 {
            let m = p.transition(i);
            let player = match q.turn(&self.sig, self.fuel)? {
                Turn::Over(_) => return Ok(false),
                Turn::Eloise => {
                    if self.omega.choose(&q)? != m {
                        return Ok(false);
                    }
                    Player::Eloise
                }
                Turn::Abelard => Player::Abelard,
            };
            if q.play(&self.sig, self.fuel, player, m).is_err() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The improvement relation `E(n0, n1)`.
    pub fn improves(&self, n0: u64, n1: u64) -> GResult<bool> {
        let (Some(p0), Some(p1)) = (code::decode(&self.root, n0), code::decode(&self.root, n1)) else {
            return Ok(false);
        };
        let grows = p1.plays.len() > p0.plays.len() && p1.plays.starts_with(&p0.plays) && p1.current() == p0.current();
        if !grows || owner(&p0.position()?) != Some(Player::Eloise) {
            return Ok(false);
        }
        Ok(self.omega_correct(&p0)? && self.omega_correct(&p1)?)
    }

    /// `Ψ[s](z)`: follows the improvements recorded in `s`.
    pub fn psi(&self, s: &KnowledgeState, z: u64) -> GResult<u64> {
        let mut z = z;
        for _ in 0..self.max_improvements {
            match s.lookup(E_PRED, &[z]) {
                Some(next) => z = next,
                None => return Ok(z),
            }
        }
        Err(GameError::NonTotalStrategy(format!("more than {} improvements", self.max_improvements)))
    }

    /// `Π[s](|p|)`: the 1-backtracking play built along the play `p` of
    /// `T_A`, improved at every step as far as `s` knows.
    pub fn pi(&self, s: &KnowledgeState, moves: &[Move]) -> GResult<u64> {
        let mut z = self.psi(s, code::encode_moves(&[])?)?;
        for mv in moves {
            z = self.psi(s, code::push(z, BMove::Extend { mv: *mv })?)?;
        }
        Ok(z)
    }

    fn decode(&self, z: u64) -> GResult<BPlay> {
        code::decode(&self.root, z).ok_or_else(|| GameError::NonTotalStrategy(format!("bad play code {z}")))
    }

    /// `Ω₀[s]`: Eloise's move at the end of `moves`.
    pub fn omega0(&self, s: &KnowledgeState, moves: &[Move]) -> GResult<Move> {
        let q = self.decode(self.pi(s, moves)?)?;
        match self.omega.choose(&q)? {
            BMove::Extend { mv } => Ok(mv),
            m => Err(GameError::NonTotalStrategy(format!("ω answers {m} at an Eloise position"))),
        }
    }

    /// `Λ[s](z)`: the improvements revealed by the lost play coded by `z`.
    pub fn lambda(&self, s: &KnowledgeState, z: u64) -> GResult<KnowledgeState> {
        let q = self.decode(z)?;
        let pos = q.position()?;
        if !pos.is_atomic() || q.turn(&self.sig, self.fuel)? != Turn::Eloise || !self.omega_correct(&q)? {
            return Ok(KnowledgeState::empty());
        }
        let BMove::Backtrack { keep } = self.omega.choose(&q)? else {
            return Err(GameError::NonTotalStrategy("ω does not backtrack at a lost atom".into()));
        };
        let mut r = q.clone();
        r.plays.push(q.current()[..keep].to_vec());
        let n1 = code::encode(&r)?;
        let target = r.current().to_vec();
        let mut out = KnowledgeState::empty();
        for k in 0..r.plays.len() - 1 {
            if r.plays[k] != target {
                continue;
            }
            let n0 = code::encode(&r.prefix(k))?;
            if s.lookup(E_PRED, &[n0]).is_some() || !self.improves(n0, n1)? {
                continue;
            }
            out = out
                .with_atom(Atom::new_unchecked(E_PRED.into(), vec![n0], n1))
                .expect("one atom per prefix");
        }
        Ok(out)
    }

    /// `Ω₁[s]`: what Eloise learns at the atom ending `moves`.
    pub fn omega1(&self, s: &KnowledgeState, moves: &[Move]) -> GResult<KnowledgeState> {
        self.lambda(s, self.pi(s, moves)?)
    }
}

/// A realizer produced from a learning strategy, with the signature
/// declaring its oracles.
pub struct Realized {
    pub sig: Signature,
    pub term: OracleTerm,
    /// `Ψ` written as a fixpoint term over the `E` oracles, for display.
    pub psi: String,
}

/// How a concrete play is rebuilt from an abstract one: connective sides
/// are fixed, quantifier moves come from the oracle's arguments.
#[derive(Clone, Copy)]
enum Step {
    Side(Move),
    Arg(usize),
}

fn moves_of(path: &[Step], args: &[u64]) -> Vec<Move> {
    path.iter()
        .map(|s| match s {
            Step::Side(m) => *m,
            Step::Arg(i) => Move::Num(args[*i]),
        })
        .collect()
}

fn rule_err(c: &str, e: GameError) -> KernelError {
    KernelError::RuleFailure { constant: c.into(), msg: e.to_string() }
}

struct Builder {
    sig: Signature,
    ls: Arc<LearningStrategy>,
    next: usize,
}

impl Builder {
    /// Declares an oracle for the abstract play `path` with approximation
    /// `f[s](moves)`, and applies it to the variables in scope.
    fn oracle<F>(&mut self, kind: &str, result: Type, path: &[Step], vars: &[Name], f: F) -> Term
    where
        F: Fn(&LearningStrategy, &KnowledgeState, &[Move]) -> GResult<Term> + Send + Sync + 'static,
    {
        let id = self.next;
        self.next += 1;
        let oracle = format!("Om.{kind}{id}");
        let approx = format!("om.{kind}{id}");
        let ty = Type::arrows(vec![Type::Nat; vars.len()], result);
        let ls = self.ls.clone();
        let path = path.to_vec();
        let name = approx.clone();
        self.sig.add_rule(&approx, Type::arrow(Type::State, ty.clone()), move |_, a| {
            let s = a[0].as_state().ok_or_else(|| rule_err(&name, GameError::NotValue(a[0].to_string(), "state")))?;
            let args: Vec<u64> = a[1..]
                .iter()
                .map(|t| t.as_num().ok_or_else(|| rule_err(&name, GameError::NotValue(t.to_string(), "numeral"))))
                .collect::<Result<_, _>>()?;
            f(&ls, s, &moves_of(&path, &args)).map_err(|e| rule_err(&name, e))
        });
        self.sig.add_oracle(&oracle, ty.clone(), &approx);
        Term::apps(Term::Const(oracle.into(), ty), vars.iter().map(|v| Term::Var(v.clone(), Type::Nat)))
    }

    fn build(&mut self, a: &Formula, path: &mut Vec<Step>, vars: &mut Vec<Name>) -> GResult<Term> {
        Ok(match a {
            Formula::Atom(_) => self.oracle("L", Type::State, path, vars, |ls, s, m| {
                Ok(Term::StateConst(ls.omega1(s, m)?))
            }),
            Formula::And(l, r) | Formula::Or(l, r) => {
                path.push(Step::Side(Move::Left));
                let tl = self.build(l, path, vars)?;
                path.pop();
                path.push(Step::Side(Move::Right));
                let tr = self.build(r, path, vars)?;
                path.pop();
                if let Formula::And(..) = a {
                    Term::pair(tl, tr)
                } else {
                    let b = self.oracle("B", Type::Bool, path, vars, |ls, s, m| {
                        Ok(Term::bool(ls.omega0(s, m)? == Move::Left))
                    });
                    Term::pair(b, Term::pair(tl, tr))
                }
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => {
                let v: Name = format!("x{}", vars.len()).into();
                let witness = match a {
                    Formula::Exists(..) => Some(self.oracle("N", Type::Nat, path, vars, |ls, s, m| {
                        match ls.omega0(s, m)? {
                            Move::Num(n) => Ok(Term::num(n)),
                            mv => Err(GameError::NonTotalStrategy(format!("side {mv} at a quantifier"))),
                        }
                    })),
                    _ => None,
                };
                path.push(Step::Arg(vars.len()));
                vars.push(v.clone());
                let tb = self.build(b, path, vars)?;
                vars.pop();
                path.pop();
                let lam = Term::lam_n(v, Type::Nat, tb);
                match witness {
                    Some(w) => Term::pair(w.clone(), Term::app(lam, w)),
                    None => lam,
                }
            }
            Formula::Implies(..) => return Err(GameError::NotImplicationFree(a.to_string())),
        })
    }
}

/// The realizer `t_A` of the learning strategy: pairs and abstractions
/// following `A`, with one oracle for each abstract play at which Eloise
/// chooses or learns.
pub fn strategy_to_realizer(ls: Arc<LearningStrategy>) -> GResult<Realized> {
    let mut sig = ls.sig.clone();
    let checker = ls.clone();
    sig.add_rule("E.check", Type::arrows([Type::Nat, Type::Nat], Type::Bool), move |_, a| {
        let n0 = a[0].as_num().unwrap_or(0);
        let n1 = a[1].as_num().unwrap_or(0);
        Ok(Term::bool(checker.improves(n0, n1).map_err(|e| rule_err("E.check", e))?))
    });
    let body = Term::Const("E.check".into(), Type::arrows([Type::Nat, Type::Nat], Type::Bool));
    sig.add_predicate(E_PRED, 1, body)?;
    let mut b = Builder { sig, ls: ls.clone(), next: 0 };
    let root = ls.root.clone();
    let t = b.build(&root, &mut Vec::new(), &mut Vec::new())?;
    let term = OracleTerm::new(&b.sig, t)?;
    Ok(Realized { psi: psi_term(), sig: b.sig, term })
}

/// `Y (λy λz. if (Χ_E z) (y (Φ_E z)) z)`
fn psi_term() -> String {
    let nn = Type::arrow(Type::Nat, Type::Nat);
    let z = Term::var("z", Type::Nat);
    let y = Term::var("y", nn.clone());
    let chi = Term::Const("Chi.E".into(), Type::arrow(Type::Nat, Type::Bool));
    let chi = Term::app(chi, z.clone());
    let phi = Term::app(Term::constant("Phi.E", nn.clone()), z.clone());
    let body = Term::ite(Type::Nat, chi, Term::app(y, phi), z);
    let alpha = Term::lam("y", nn.clone(), Term::lam("z", Type::Nat, body));
    print_term(&Term::app(Term::Y(nn), alpha))
}
