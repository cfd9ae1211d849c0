//! Realizers: extraction from proofs, a bounded realizability checker and
//! witness extraction through the zero loop.

pub mod terms;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{normalize_with_fuel, Name, Signature, Term, DEFAULT_FUEL};
use crate::logic::{check_proof, Formula, LogicError, PostTable, Proof};
use crate::oracle::{approximate, zero_loop, OracleError, OracleTerm, ZeroConfig, ZeroRun};
use crate::states::KnowledgeState;

pub use terms::{
    chi_axiom_formula, chi_axiom_realizer, cup, cup_all, em1_formula, em1_realizer, p0, p1, p2,
    phi_axiom_formula, realizer_type,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RealizerError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("proof has open assumptions: {0:?}")]
    OpenAssumptions(Vec<String>),
    #[error("formula `{0}` is not of the form ∀x⃗ ∃y A with A built from atoms by ∧ and ∃")]
    NotPi2(String),
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("`{0}` did not evaluate to a {1}")]
    NotValue(String, &'static str),
    #[error("extracted witness fails the formula at its zero state: {0}")]
    WitnessFailed(String),
}

impl From<crate::kernel::KernelError> for RealizerError {
    fn from(e: crate::kernel::KernelError) -> Self {
        RealizerError::Oracle(e.into())
    }
}

pub type RResult<T> = Result<T, RealizerError>;

/// Extracts the realizer of a closed proof without open assumptions.
pub fn extract(sig: &Signature, posts: &PostTable, p: &Proof) -> RResult<(Formula, OracleTerm)> {
    let c = check_proof(sig, posts, p)?;
    if !c.hyps.is_empty() {
        return Err(RealizerError::OpenAssumptions(c.hyps.keys().map(|k| k.to_string()).collect()));
    }
    let t = OracleTerm::new(sig, c.realizer)?;
    Ok((c.conclusion, t))
}

/// Outcome of a bounded realizability check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Realized,
    /// The failing clause, with the instantiations that led to it.
    Refuted { path: Vec<String>, reason: String },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }

    fn and(self, other: impl FnOnce() -> RResult<Verdict>) -> RResult<Verdict> {
        match self {
            Verdict::Refuted { .. } => Ok(self),
            Verdict::Realized => other(),
            Verdict::Inconclusive { .. } => match other()? {
                r @ Verdict::Refuted { .. } => Ok(r),
                _ => Ok(self),
            },
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Realized => write!(f, "realized"),
            Verdict::Refuted { path, reason } => write!(f, "refuted at {}: {reason}", path.join(" / ")),
            Verdict::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

/// Candidate realizers tried for the antecedents of implications.
#[derive(Clone, Debug, Default)]
pub struct Candidates {
    entries: Vec<(Formula, Vec<Term>)>,
}

impl Candidates {
    pub fn new() -> Candidates {
        Candidates::default()
    }

    pub fn add(&mut self, f: Formula, t: Term) {
        match self.entries.iter_mut().find(|(g, _)| *g == f) {
            Some((_, ts)) => ts.push(t),
            None => self.entries.push((f, vec![t])),
        }
    }

    fn get(&self, sig: &Signature, f: &Formula) -> RResult<Vec<Term>> {
        let mut out = Vec::new();
        for (g, ts) in &self.entries {
            if g.equiv(f, sig).map_err(LogicError::from)? {
                out.extend(ts.iter().cloned());
            }
        }
        Ok(out)
    }
}

/// Settings of [`realizes_bounded`].
#[derive(Clone, Copy, Debug)]
pub struct Bound {
    /// Universal quantifiers are tested on `0..=quantifier`.
    pub quantifier: u64,
    pub fuel: u64,
}

impl Default for Bound {
    fn default() -> Self {
        Bound { quantifier: 8, fuel: DEFAULT_FUEL }
    }
}

struct Realizes<'a> {
    sig: &'a Signature,
    s: &'a KnowledgeState,
    bound: Bound,
    candidates: &'a Candidates,
}

impl Realizes<'_> {
    fn eval(&self, t: &Term) -> RResult<Term> {
        Ok(normalize_with_fuel(self.sig, &approximate(self.sig, t, self.s), self.bound.fuel)?.0)
    }

    fn check(&self, t: &Term, a: &Formula, path: &mut Vec<String>) -> RResult<Verdict> {
        match a {
            Formula::Atom(p) => {
                let ts = self.eval(t)?;
                let st = ts.as_state().ok_or_else(|| RealizerError::NotValue(ts.to_string(), "state"))?;
                if !st.is_empty() {
                    return Ok(Verdict::Realized);
                }
                let v = self.eval(p)?;
                match v.as_bool() {
                    Some(true) => Ok(Verdict::Realized),
                    Some(false) => Ok(Verdict::Refuted {
                        path: path.clone(),
                        reason: format!("realizer learns nothing but `{a}` is false"),
                    }),
                    None => Err(RealizerError::NotValue(v.to_string(), "boolean")),
                }
            }
            Formula::And(l, r) => {
                path.push("left".into());
                let v = self.check(&Term::proj(0, t.clone()), l, path)?;
                path.pop();
                v.and(|| {
                    path.push("right".into());
                    let v = self.check(&Term::proj(1, t.clone()), r, path);
                    path.pop();
                    v
                })
            }
            Formula::Or(l, r) => {
                let b = self.eval(&p0(t.clone()))?;
                let (side, sub, f) = match b.as_bool() {
                    Some(true) => ("left", p1(t.clone()), l),
                    Some(false) => ("right", p2(t.clone()), r),
                    None => return Err(RealizerError::NotValue(b.to_string(), "boolean")),
                };
                path.push(side.into());
                let v = self.check(&sub, f, path);
                path.pop();
                v
            }
            Formula::Implies(l, r) => {
                let cands = self.candidates.get(self.sig, l)?;
                if cands.is_empty() {
                    return Ok(Verdict::Inconclusive { reason: format!("no candidate realizers for `{l}`") });
                }
                let mut verdict = Verdict::Realized;
                for (i, u) in cands.into_iter().enumerate() {
                    // Only candidates that realize the antecedent constrain t.
                    if self.check(&u, l, &mut Vec::new())? != Verdict::Realized {
                        continue;
                    }
                    path.push(format!("candidate {i}"));
                    let v = self.check(&Term::app(t.clone(), u), r, path)?;
                    path.pop();
                    verdict = verdict.and(|| Ok(v))?;
                    if verdict.is_refuted() {
                        break;
                    }
                }
                Ok(verdict)
            }
            Formula::Forall(x, body) => {
                let mut verdict = Verdict::Realized;
                for n in 0..=self.bound.quantifier {
                    path.push(format!("{x}={n}"));
                    let v = self.check(&Term::app(t.clone(), Term::num(n)), &body.subst(x, &Term::num(n)), path)?;
                    path.pop();
                    verdict = verdict.and(|| Ok(v))?;
                    if verdict.is_refuted() {
                        break;
                    }
                }
                Ok(verdict)
            }
            Formula::Exists(x, body) => {
                let w = self.eval(&Term::proj(0, t.clone()))?;
                let n = w.as_num().ok_or_else(|| RealizerError::NotValue(w.to_string(), "numeral"))?;
                path.push(format!("{x}:={n}"));
                let v = self.check(&Term::proj(1, t.clone()), &body.subst(x, &Term::num(n)), path);
                path.pop();
                v
            }
        }
    }
}

/// Bounded test of `t ⊩_s A`: universal quantifiers range over numerals up
/// to the bound and implications over the supplied candidates.
pub fn realizes_bounded(
    sig: &Signature,
    t: &Term,
    a: &Formula,
    s: &KnowledgeState,
    bound: Bound,
    candidates: &Candidates,
) -> RResult<Verdict> {
    Realizes { sig, s, bound, candidates }.check(t, a, &mut Vec::new())
}

/// A witness computed from a realizer of `∀x⃗ ∃y A`.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub args: Vec<u64>,
    /// The outer witness `y` followed by witnesses of existentials in `A`.
    pub values: Vec<u64>,
    pub zero: KnowledgeState,
    pub run: ZeroRun,
}

impl Witness {
    pub fn value(&self) -> u64 {
        self.values[0]
    }
}

/// Leading universal variables and the existential body.
pub fn pi2_shape(a: &Formula) -> Option<(Vec<Name>, &Formula)> {
    let mut xs = Vec::new();
    let mut cur = a;
    while let Formula::Forall(x, b) = cur {
        xs.push(x.clone());
        cur = b;
    }
    fn simple(f: &Formula) -> bool {
        match f {
            Formula::Atom(_) => true,
            Formula::And(a, b) => simple(a) && simple(b),
            Formula::Exists(_, a) => simple(a),
            _ => false,
        }
    }
    match cur {
        Formula::Exists(_, body) if simple(body) => Some((xs, cur)),
        _ => None,
    }
}

/// State-typed components of a realizer of an ∧/∃ formula over atoms.
fn state_leaves(t: Term, a: &Formula, out: &mut Vec<Term>) {
    match a {
        Formula::Atom(_) => out.push(t),
        Formula::And(l, r) => {
            state_leaves(Term::proj(0, t.clone()), l, out);
            state_leaves(Term::proj(1, t), r, out);
        }
        Formula::Exists(_, b) => state_leaves(Term::proj(1, t), b, out),
        _ => unreachable!("pi2_shape admits only atoms, conjunctions and existentials"),
    }
}

/// `λn. t n` restricted to what it learns: the union of the state
/// components of a realizer `t` of `∀x ∃y A` (or of `∃y A`, ignoring `n`).
pub fn state_family(sig: &Signature, t: &Term, a: &Formula) -> RResult<OracleTerm> {
    let (xs, ex) = pi2_shape(a).ok_or_else(|| RealizerError::NotPi2(a.to_string()))?;
    let n = crate::kernel::fresh_name("n");
    let u = match xs.len() {
        0 => t.clone(),
        1 => Term::app(t.clone(), Term::Var(n.clone(), crate::kernel::Type::Nat)),
        k => return Err(RealizerError::Arity { expected: 1, found: k }),
    };
    let mut leaves = Vec::new();
    state_leaves(u, ex, &mut leaves);
    let body = cup_all(sig, leaves)?;
    Ok(OracleTerm::new(sig, Term::lam_n(n, crate::kernel::Type::Nat, body))?)
}

/// Computes a witness for `∃y A[n⃗/x⃗]` from a realizer of `∀x⃗ ∃y A`: the
/// zero loop finds a state at which the realizer learns nothing, and the
/// witness is read off at that state.
pub fn extract_witness(
    sig: &Signature,
    t: &Term,
    a: &Formula,
    args: &[u64],
    cfg: ZeroConfig,
) -> RResult<Witness> {
    let (xs, ex) = pi2_shape(a).ok_or_else(|| RealizerError::NotPi2(a.to_string()))?;
    if xs.len() != args.len() {
        return Err(RealizerError::Arity { expected: xs.len(), found: args.len() });
    }
    let mut u = t.clone();
    let mut f = ex.clone();
    for (x, n) in xs.iter().zip(args) {
        u = Term::app(u, Term::num(*n));
        f = f.subst(x, &Term::num(*n));
    }
    let mut leaves = Vec::new();
    state_leaves(u.clone(), &f, &mut leaves);
    let v = cup_all(sig, leaves)?;
    let run = zero_loop(sig, &v, &KnowledgeState::empty(), cfg)?;
    let zero = run.zero.clone();

    // Read the witnesses at the zero state and confirm every atom.
    let eval = |t: &Term| -> RResult<Term> {
        Ok(normalize_with_fuel(sig, &approximate(sig, t, &zero), cfg.step_fuel)?.0)
    };
    let mut values = Vec::new();
    let mut todo = vec![(u, f)];
    while let Some((r, g)) = todo.pop() {
        match g {
            Formula::Atom(p) => {
                if eval(&p)?.as_bool() != Some(true) {
                    return Err(RealizerError::WitnessFailed(Formula::Atom(p).to_string()));
                }
            }
            Formula::And(l, rr) => {
                todo.push((Term::proj(1, r.clone()), *rr));
                todo.push((Term::proj(0, r), *l));
            }
            Formula::Exists(x, b) => {
                let w = eval(&Term::proj(0, r.clone()))?;
                let n = w.as_num().ok_or_else(|| RealizerError::NotValue(w.to_string(), "numeral"))?;
                values.push(n);
                todo.push((Term::proj(1, r), b.subst(&x, &Term::num(n))));
            }
            _ => unreachable!("pi2_shape admits only atoms, conjunctions and existentials"),
        }
    }
    Ok(Witness { args: args.to_vec(), values, zero, run })
}
