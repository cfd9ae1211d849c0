//! Oracle terms, their approximation at a knowledge state and the zero
//! loop `s ↦ s ⋓ t[s]` that finds a state where a term learns nothing.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{
    normalize_with_fuel, print_term, typecheck, ConstKind, Ctx, KernelError, Signature, Term, Type,
    DEFAULT_FUEL,
};
use crate::states::KnowledgeState;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("term is not closed: free variables {0:?}")]
    NotClosed(Vec<String>),
    #[error("expected a term of type State, found {0}")]
    NotState(Type),
    #[error("oracle term contains a non-empty state literal")]
    StateLiteral,
    #[error("zero loop did not reach a zero within {0} iterations")]
    IterationLimit(usize),
    #[error("zero loop made no progress at iteration {0}: emitted atoms are already decided")]
    NoProgress(usize),
    #[error("value did not stabilise within horizon {0}")]
    NotStabilized(usize),
    #[error("chain is not weakly increasing at index {0}")]
    NotMonotone(usize),
}

pub type OResult<T> = Result<T, OracleError>;

/// A term of the classical language: it may use oracle constants and its
/// only state literals are empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTerm {
    pub term: Term,
    pub ty: Type,
}

impl OracleTerm {
    pub fn new(sig: &Signature, term: Term) -> OResult<OracleTerm> {
        let fv = term.free_vars();
        if !fv.is_empty() {
            return Err(OracleError::NotClosed(fv.iter().map(|n| n.to_string()).collect()));
        }
        if term.states().iter().any(|s| !s.is_empty()) {
            return Err(OracleError::StateLiteral);
        }
        let ty = typecheck(&term, &Ctx::new(), sig)?;
        Ok(OracleTerm { term, ty })
    }

    /// Every state literal of the term is empty.
    pub fn state_empty(&self) -> bool {
        self.term.states().iter().all(KnowledgeState::is_empty)
    }
}

/// `t[s]`: every oracle constant `C` becomes `c s`, its approximation at
/// `s`.
pub fn approximate(sig: &Signature, t: &Term, s: &KnowledgeState) -> Term {
    t.rewrite(&mut |u| match u {
        Term::Const(name, _) => match sig.get(name).map(|d| &d.kind) {
            Some(ConstKind::Oracle { approx }) => {
                let d = sig.get(approx).expect("approximation is registered with its oracle");
                Some(Term::app(
                    Term::Const(d.name.clone(), d.ty.clone()),
                    Term::StateConst(s.clone()),
                ))
            }
            _ => None,
        },
        _ => None,
    })
}

/// Normal form of `t[s]`.
pub fn eval_at(sig: &Signature, t: &Term, s: &KnowledgeState, fuel: u64) -> OResult<Term> {
    Ok(normalize_with_fuel(sig, &approximate(sig, t, s), fuel)?.0)
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroConfig {
    pub max_iterations: usize,
    /// Reduction fuel for each evaluation of `t[s]`.
    pub step_fuel: u64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig { max_iterations: 10_000, step_fuel: DEFAULT_FUEL }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub index: usize,
    pub state: KnowledgeState,
    /// Normal form of `t[state]`.
    pub emitted: KnowledgeState,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroRun {
    pub zero: KnowledgeState,
    pub trace: Vec<TraceEntry>,
}

impl ZeroRun {
    /// Number of iterations that learned something.
    pub fn learning_steps(&self) -> usize {
        self.trace.iter().filter(|e| !e.emitted.is_empty()).count()
    }

    /// Writes one JSON object per trace entry.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.trace {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Iterates `s_{n+1} = s_n ⋓ t[s_n]` from `s0` until `t[s_n]` is empty.
pub fn zero_loop(sig: &Signature, t: &Term, s0: &KnowledgeState, cfg: ZeroConfig) -> OResult<ZeroRun> {
    let ty = typecheck(t, &Ctx::new(), sig)?;
    if ty != Type::State {
        return Err(OracleError::NotState(ty));
    }
    let mut cache: HashMap<KnowledgeState, (KnowledgeState, u64)> = HashMap::new();
    let mut s = s0.clone();
    let mut trace = Vec::new();
    for index in 0..cfg.max_iterations {
        let (emitted, steps) = match cache.get(&s) {
            Some(hit) => hit.clone(),
            None => {
                let (nf, steps) = normalize_with_fuel(sig, &approximate(sig, t, &s), cfg.step_fuel)?;
                let st = nf.as_state().cloned().ok_or_else(|| {
                    KernelError::RuleFailure {
                        constant: "zero_loop".into(),
                        msg: format!("state term did not normalize to a literal: {}", print_term(&nf)),
                    }
                })?;
                cache.insert(s.clone(), (st.clone(), steps));
                (st, steps)
            }
        };
        trace.push(TraceEntry { index, state: s.clone(), emitted: emitted.clone(), steps });
        if emitted.is_empty() {
            return Ok(ZeroRun { zero: s, trace });
        }
        let next = s.cup(&emitted);
        if next == s {
            return Err(OracleError::NoProgress(index));
        }
        s = next;
    }
    Err(OracleError::IterationLimit(cfg.max_iterations))
}

/// A weakly increasing chain of states, given by its first elements; the
/// chain is constant after the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WIChain {
    states: Vec<KnowledgeState>,
}

impl WIChain {
    pub fn new(states: Vec<KnowledgeState>) -> OResult<WIChain> {
        for (i, w) in states.windows(2).enumerate() {
            if !w[0].leq(&w[1]) {
                return Err(OracleError::NotMonotone(i + 1));
            }
        }
        Ok(WIChain { states })
    }

    /// The chain traversed by a zero loop.
    pub fn from_run(run: &ZeroRun) -> WIChain {
        WIChain { states: run.trace.iter().map(|e| e.state.clone()).collect() }
    }

    pub fn at(&self, n: usize) -> KnowledgeState {
        self.states
            .get(n)
            .or(self.states.last())
            .cloned()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Least `n < horizon` such that `t[s_m]` has the same normal form for all
/// `n ≤ m < horizon`.
pub fn stabilization_index(sig: &Signature, t: &Term, chain: &WIChain, horizon: usize) -> OResult<usize> {
    if horizon == 0 {
        return Err(OracleError::NotStabilized(0));
    }
    let values: Vec<Term> = (0..horizon)
        .map(|m| eval_at(sig, t, &chain.at(m), DEFAULT_FUEL))
        .collect::<OResult<_>>()?;
    let last = &values[horizon - 1];
    let mut n = horizon - 1;
    while n > 0 && values[n - 1] == *last {
        n -= 1;
    }
    // A value that only settles on the very last probe has not been seen
    // to stabilise.
    if n == horizon - 1 && horizon > 1 {
        return Err(OracleError::NotStabilized(horizon));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term;

    fn sig() -> Signature {
        let mut s = Signature::prelude();
        let body = parse_term(&s, "(lam (x Nat) (y Nat) (eq x (times y y)))").unwrap();
        s.add_predicate("P", 1, body).unwrap();
        s
    }

    #[test]
    fn approximation_replaces_oracles() {
        let s = sig();
        let t = parse_term(&s, "(Chi.P 9)").unwrap();
        let st = s.state([("P".to_string(), vec![9], 3)]).unwrap();
        assert_eq!(eval_at(&s, &t, &KnowledgeState::empty(), 1000).unwrap(), Term::False);
        assert_eq!(eval_at(&s, &t, &st, 1000).unwrap(), Term::True);
    }

    #[test]
    fn zero_loop_learns_then_stops() {
        let s = sig();
        // Learn a square root of 9 by probing 3 whenever it is not known.
        let t = parse_term(&s, "(app (if State) (Chi.P 9) {} (Add.P 9 3))").unwrap();
        let run = zero_loop(&s, &t, &KnowledgeState::empty(), ZeroConfig::default()).unwrap();
        assert_eq!(run.zero.to_string(), "{(P 9 3)}");
        assert_eq!(run.trace.len(), 2);
        assert_eq!(run.learning_steps(), 1);
        let mut buf = Vec::new();
        run.write_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn oracle_terms_reject_literals() {
        let s = sig();
        let t = parse_term(&s, "{(P 4 2)}").unwrap();
        assert_eq!(OracleTerm::new(&s, t), Err(OracleError::StateLiteral));
        let t = parse_term(&s, "(Add.P 4 2)").unwrap();
        assert!(OracleTerm::new(&s, t).unwrap().state_empty());
    }

    #[test]
    fn stabilisation_on_chain() {
        let s = sig();
        let t = parse_term(&s, "(Phi.P 16)").unwrap();
        let a = KnowledgeState::empty();
        let b = s.state([("P".to_string(), vec![16], 4)]).unwrap();
        let chain = WIChain::new(vec![a.clone(), a, b]).unwrap();
        assert_eq!(stabilization_index(&s, &t, &chain, 6).unwrap(), 2);
        assert!(WIChain::new(vec![chain.at(2), KnowledgeState::empty()]).is_err());
    }
}
