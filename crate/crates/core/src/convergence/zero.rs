use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::kernel::{cantor_pair, cantor_unpair, ConstKind, Name, Signature, Term, Type, DEFAULT_FUEL};
use crate::oracle::{eval_at, OracleTerm};
use crate::states::KnowledgeState;

use super::model::{interpret, phi, FunChain, StarValue};
use super::modulus::Fun;
use super::{CResult, ConvergenceError};

/// Codes knowledge states as functions `Nat -> Nat`, so that all oracles
/// of a term read one function `Φ`.
///
/// The argument `⟨i, ⟨x₁, ⟨x₂, …⟩⟩⟩` (Cantor pairs) stands for the `i`-th
/// predicate, in name order, at parameters `x⃗`. The value is the witness
/// plus one when the state has an atom there, and `0` otherwise.
#[derive(Clone, Debug)]
pub struct StateCoding {
    preds: Vec<(Name, usize)>,
}

fn pack(xs: &[u64]) -> Option<u64> {
    match xs {
        [] => Some(0),
        [x] => Some(*x),
        [x, rest @ ..] => cantor_pair(*x, pack(rest)?),
    }
}

fn unpack(mut z: u64, arity: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(arity);
    for i in 0..arity {
        if i + 1 == arity {
            out.push(z);
        } else {
            let (x, rest) = cantor_unpair(z);
            out.push(x);
            z = rest;
        }
    }
    out
}

impl StateCoding {
    pub fn new(sig: &Signature) -> StateCoding {
        StateCoding { preds: sig.predicates().map(|p| (p.name.clone(), p.arity)).collect() }
    }

    fn index(&self, pred: &str) -> Option<usize> {
        self.preds.iter().position(|(p, _)| &**p == pred)
    }

    pub fn code(&self, pred: &str, args: &[u64]) -> Option<u64> {
        cantor_pair(self.index(pred)? as u64, pack(args)?)
    }

    /// `f_σ(code)`
    pub fn value(&self, s: &KnowledgeState, code: u64) -> u64 {
        let (i, rest) = cantor_unpair(code);
        let Some((p, arity)) = self.preds.get(i as usize) else { return 0 };
        let args = unpack(rest, *arity);
        if pack(&args) != Some(rest) {
            return 0;
        }
        s.lookup(p, &args).map_or(0, |w| w + 1)
    }

    /// The kernel term computing the code of `P x⃗` from the variables `x⃗`.
    fn code_term(&self, i: usize, xs: &[Term]) -> Term {
        let pair = Term::constant("pair", Type::arrows([Type::Nat, Type::Nat], Type::Nat));
        let packed = match xs {
            [] => Term::Zero,
            _ => {
                let mut it = xs.iter().rev();
                let mut acc = it.next().expect("non-empty").clone();
                for x in it {
                    acc = Term::apps(pair.clone(), [x.clone(), acc]);
                }
                acc
            }
        };
        Term::apps(pair, [Term::num(i as u64), packed])
    }

    /// `χ^g`, `φ^g` and `add^g` for the oracle `name`, reading the state
    /// from `Φ`.
    pub fn decoder(&self, name: &str) -> Option<Term> {
        let (kind, pred) = name.split_once('.')?;
        let i = self.index(pred)?;
        let arity = self.preds[i].1;
        let xs: Vec<Name> = (0..arity).map(|k| format!("x{k}").into()).collect();
        let vars: Vec<Term> = xs.iter().map(|x| Term::Var(x.clone(), Type::Nat)).collect();
        let nat2 = |r: Type| Type::arrows([Type::Nat, Type::Nat], r);
        let read = Term::app(phi(), self.code_term(i, &vars));
        let unknown = Term::apps(Term::constant("eq", nat2(Type::Bool)), [read.clone(), Term::Zero]);
        let body = match kind {
            "Chi" => Term::app(Term::constant("not", Type::arrow(Type::Bool, Type::Bool)), unknown),
            "Phi" => Term::apps(Term::constant("monus", nat2(Type::Nat)), [read, Term::num(1)]),
            "Add" => {
                let y = Term::var("y", Type::Nat);
                let add_ty = Type::arrows(
                    std::iter::once(Type::State).chain(vec![Type::Nat; arity + 1]),
                    Type::State,
                );
                let mut args = vec![Term::empty_state()];
                args.extend(vars.iter().cloned());
                args.push(y);
                let add = Term::apps(Term::constant(&format!("add.{pred}"), add_ty), args);
                Term::lam("y", Type::Nat, Term::ite(Type::State, unknown, add, Term::empty_state()))
            }
            _ => return None,
        };
        Some(xs.into_iter().rev().fold(body, |acc, x| Term::lam_n(x, Type::Nat, acc)))
    }

    /// `t^Φ`: every oracle `Chi.P`, `Phi.P`, `Add.P` replaced by its decoder.
    pub fn decode_oracles(&self, sig: &Signature, t: &Term) -> CResult<Term> {
        let mut bad = None;
        let out = t.rewrite(&mut |u| match u {
            Term::Const(c, _) if matches!(sig.get(c).map(|d| &d.kind), Some(ConstKind::Oracle { .. })) => {
                let d = self.decoder(c);
                if d.is_none() {
                    bad = Some(c.to_string());
                }
                d
            }
            _ => None,
        });
        match bad {
            Some(c) => Err(ConvergenceError::Unsupported(format!("oracle {c}"))),
            None => Ok(out),
        }
    }
}

/// Result of [`zero_via_moduli`].
#[derive(Clone, Debug, Serialize)]
pub struct ModuliZero {
    pub state: KnowledgeState,
    /// `M_h(0)` for `h = λm. m + 1`.
    pub k: u64,
    /// The states `σ_0 … σ_{k+1}` of the chain that were computed.
    pub chain: Vec<KnowledgeState>,
}

/// A zero of `t n` found through moduli of convergence: with
/// `σ_0 = ∅`, `σ_{m+1} = σ_m ⋓ t_n[σ_m]` and `k` the modulus of
/// `m ↦ t_n[σ_m]` at `h = λm. m + 1`, the state `σ_{k+1}` is a zero.
pub fn zero_via_moduli(sig: &Signature, t: &OracleTerm, n: u64) -> CResult<ModuliZero> {
    let tn = Term::app(t.term.clone(), Term::num(n));
    let coding = StateCoding::new(sig);
    let u = coding.decode_oracles(sig, &tn)?;
    let states = Arc::new(Mutex::new(vec![KnowledgeState::empty()]));
    let sigma = {
        let (sig, tn, states) = (sig.clone(), tn.clone(), states.clone());
        move |m: u64| -> CResult<KnowledgeState> {
            let mut st = states.lock().expect("chain states");
            while st.len() as u64 <= m {
                let s = st.last().expect("non-empty").clone();
                let v = eval_at(&sig, &tn, &s, DEFAULT_FUEL)?;
                let learned = v.as_state().ok_or_else(|| ConvergenceError::NotAtomic(v.to_string()))?;
                st.push(s.cup(learned));
            }
            Ok(st[m as usize].clone())
        }
    };
    let chain = {
        let (sigma, coding) = (sigma.clone(), coding.clone());
        FunChain::new(move |m, c| Ok(coding.value(&sigma(m)?, c)))
    };
    let v = interpret(sig, &u, &chain)?;
    let k = v.modulus()?.apply(&Fun::plus(1), 0)?;
    let state = sigma(k + 1)?;
    let rest = eval_at(sig, &tn, &state, DEFAULT_FUEL)?;
    if rest.as_state().is_none_or(|s| !s.is_empty()) {
        return Err(ConvergenceError::ZeroFailed(format!("t[σ_{}] = {rest}", k + 1)));
    }
    let chain_states = states.lock().expect("chain states")[..=(k as usize + 1)].to_vec();
    Ok(ModuliZero { state, k, chain: chain_states })
}

/// The interpretation of `t n` with oracles read from the chain of states
/// `σ`, coded as functions.
pub fn interpret_along_states<F>(sig: &Signature, t: &Term, states: F) -> CResult<StarValue>
where
    F: Fn(u64) -> CResult<KnowledgeState> + Send + Sync + 'static,
{
    let coding = StateCoding::new(sig);
    let u = coding.decode_oracles(sig, t)?;
    let c2 = coding.clone();
    interpret(sig, &u, &FunChain::new(move |m, c| Ok(c2.value(&states(m)?, c))))
}
