use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::types::Type;
use crate::states::KnowledgeState;

pub type Name = Arc<str>;

/// Primitive operations on finite sequences `σ*`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SeqOp {
    /// `σ* -> σ -> σ*`
    Snoc,
    /// `σ* -> Nat`
    Len,
    /// `σ* -> Nat -> σ`, the sequence extended by dummies.
    Hat,
}

/// Terms of System T extended with oracle constants, state literals, a
/// fixpoint combinator and bar recursion.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Name, Type),
    Zero,
    Succ(Arc<Term>),
    True,
    False,
    /// `if_T : Bool -> T -> T -> T`
    If(Type),
    /// `R_T : T -> (Nat -> T -> T) -> Nat -> T`
    Rec(Type),
    App(Arc<Term>, Arc<Term>),
    Lam(Name, Type, Arc<Term>),
    Pair(Arc<Term>, Arc<Term>),
    Proj(u8, Arc<Term>),
    Const(Name, Type),
    StateConst(KnowledgeState),
    /// Bar recursion at result type `τ` over sequences of `σ`.
    Br(Type, Type),
    /// Guarded bar recursion, the same arguments plus the stopping test.
    BrGuard(Type, Type),
    /// `Y_A : (A -> A) -> A`
    Y(Type),
    /// Literal of type `σ*`.
    Seq(Type, Vec<Term>),
    SeqPrim(SeqOp, Type),
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A variable name that has never been produced before in this process.
pub fn fresh_name(base: &str) -> Name {
    let base = base.split('~').next().unwrap_or(base);
    let k = FRESH.fetch_add(1, Ordering::Relaxed);
    Name::from(format!("{base}~{k}"))
}

impl Term {
    pub fn var(x: &str, ty: Type) -> Term {
        Term::Var(Name::from(x), ty)
    }

    pub fn num(n: u64) -> Term {
        let mut t = Term::Zero;
        for _ in 0..n {
            t = Term::Succ(Arc::new(t));
        }
        t
    }

    pub fn bool(b: bool) -> Term {
        if b {
            Term::True
        } else {
            Term::False
        }
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Arc::new(t))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(f: Term, args: I) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(x: &str, ty: Type, body: Term) -> Term {
        Term::Lam(Name::from(x), ty, Arc::new(body))
    }

    pub fn lam_n(x: Name, ty: Type, body: Term) -> Term {
        Term::Lam(x, ty, Arc::new(body))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn proj(i: u8, t: Term) -> Term {
        Term::Proj(i, Arc::new(t))
    }

    pub fn constant(name: &str, ty: Type) -> Term {
        Term::Const(Name::from(name), ty)
    }

    pub fn state(s: KnowledgeState) -> Term {
        Term::StateConst(s)
    }

    pub fn empty_state() -> Term {
        Term::StateConst(KnowledgeState::empty())
    }

    /// `if_T c a b`
    pub fn ite(ty: Type, c: Term, a: Term, b: Term) -> Term {
        Term::apps(Term::If(ty), [c, a, b])
    }

    /// `R_T u v n`
    pub fn rec(ty: Type, u: Term, v: Term, n: Term) -> Term {
        Term::apps(Term::Rec(ty), [u, v, n])
    }

    /// Numeral value, if this is `S^n 0`.
    pub fn as_num(&self) -> Option<u64> {
        let mut n = 0u64;
        let mut cur = self;
        loop {
            match cur {
                Term::Zero => return Some(n),
                Term::Succ(t) => {
                    n += 1;
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Term::True => Some(true),
            Term::False => Some(false),
            _ => None,
        }
    }

    pub fn as_state(&self) -> Option<&KnowledgeState> {
        match self {
            Term::StateConst(s) => Some(s),
            _ => None,
        }
    }

    /// Closed normal atomic value: numeral, boolean or state literal.
    pub fn is_value(&self) -> bool {
        matches!(self, Term::True | Term::False | Term::StateConst(_)) || self.as_num().is_some()
    }

    /// Head and argument list of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x, _) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Succ(t) | Term::Proj(_, t) => t.collect_free(bound, out),
            Term::App(a, b) | Term::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Lam(x, _, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::Seq(_, xs) => xs.iter().for_each(|x| x.collect_free(bound, out)),
            _ => {}
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y, _) => &**y == x,
            Term::Succ(t) | Term::Proj(_, t) => t.has_free(x),
            Term::App(a, b) | Term::Pair(a, b) => a.has_free(x) || b.has_free(x),
            Term::Lam(y, _, b) => &**y != x && b.has_free(x),
            Term::Seq(_, xs) => xs.iter().any(|t| t.has_free(x)),
            _ => false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Succ(t) | Term::Proj(_, t) => 1 + t.size(),
            Term::App(a, b) | Term::Pair(a, b) => 1 + a.size() + b.size(),
            Term::Lam(_, _, b) => 1 + b.size(),
            Term::Seq(_, xs) => 1 + xs.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Names of all constants occurring in the term.
    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Const(c, _) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Succ(t) | Term::Proj(_, t) => t.visit(f),
            Term::App(a, b) | Term::Pair(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Lam(_, _, b) => b.visit(f),
            Term::Seq(_, xs) => xs.iter().for_each(|t| t.visit(f)),
            _ => {}
        }
    }

    /// Bottom-up rewrite of leaves and nodes; `f` returns `Some` to replace a
    /// node (its children are not visited then).
    pub fn rewrite(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Term::Succ(t) => Term::Succ(Arc::new(t.rewrite(f))),
            Term::Proj(i, t) => Term::Proj(*i, Arc::new(t.rewrite(f))),
            Term::App(a, b) => Term::App(Arc::new(a.rewrite(f)), Arc::new(b.rewrite(f))),
            Term::Pair(a, b) => Term::Pair(Arc::new(a.rewrite(f)), Arc::new(b.rewrite(f))),
            Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Arc::new(b.rewrite(f))),
            Term::Seq(ty, xs) => Term::Seq(ty.clone(), xs.iter().map(|t| t.rewrite(f)).collect()),
            other => other.clone(),
        }
    }

    /// Every state literal in the term.
    pub fn states(&self) -> Vec<KnowledgeState> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::StateConst(s) = t {
                out.push(s.clone());
            }
        });
        out
    }
}

/// `d^T`, the canonical dummy inhabitant of a type.
pub fn dummy(ty: &Type) -> Term {
    match ty {
        Type::Nat => Term::Zero,
        Type::Bool => Term::False,
        Type::State => Term::empty_state(),
        Type::Arrow(a, b) => Term::lam_n(fresh_name("d"), (**a).clone(), dummy(b)),
        Type::Product(a, b) => Term::pair(dummy(a), dummy(b)),
        Type::SeqOf(a) => Term::Seq((**a).clone(), Vec::new()),
    }
}
