use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::kernel::{normalize_with_fuel, print_term, ConstKind, Name, Signature, Term, Type, DEFAULT_FUEL};

use super::modulus::{h1_merge, Fun, Modulus, Points};
use super::{CResult, ConvergenceError};

/// Name of the distinguished constant `Φ : Nat -> Nat`.
pub const PHI: &str = "Φ";

pub fn phi() -> Term {
    Term::constant(PHI, Type::arrow(Type::Nat, Type::Nat))
}

/// A weakly increasing sequence of functions `s_m : Nat -> Nat`: once
/// `s_m(n)` is non-zero, every later `s_{m'}(n)` agrees with it.
///
/// Probes are memoised and checked against each other; a violation of
/// monotonicity is an error.
#[derive(Clone)]
pub struct FunChain {
    gen: Arc<dyn Fn(u64, u64) -> CResult<u64> + Send + Sync>,
    seen: Arc<Mutex<HashMap<u64, BTreeMap<u64, u64>>>>,
}

impl fmt::Debug for FunChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<chain>")
    }
}

impl FunChain {
    /// `gen(m, n) = s_m(n)`.
    pub fn new<F: Fn(u64, u64) -> CResult<u64> + Send + Sync + 'static>(gen: F) -> FunChain {
        FunChain { gen: Arc::new(gen), seen: Arc::default() }
    }

    /// The chain whose `m`-th element is the kernel term `gen(m) : Nat -> Nat`.
    pub fn from_terms<F>(sig: &Signature, gen: F) -> FunChain
    where
        F: Fn(u64) -> Term + Send + Sync + 'static,
    {
        let sig = sig.clone();
        FunChain::new(move |m, n| {
            let v = normalize_with_fuel(&sig, &Term::app(gen(m), Term::num(n)), DEFAULT_FUEL)?.0;
            v.as_num().ok_or_else(|| ConvergenceError::NotAtomic(v.to_string()))
        })
    }

    pub fn at(&self, m: u64, n: u64) -> CResult<u64> {
        if let Some(v) = self.seen.lock().expect("chain lock").get(&n).and_then(|c| c.get(&m)) {
            return Ok(*v);
        }
        let v = (self.gen)(m, n)?;
        let mut seen = self.seen.lock().expect("chain lock");
        let col = seen.entry(n).or_default();
        for (&m2, &v2) in col.iter() {
            let (lo, hi) = if m2 < m { (v2, v) } else { (v, v2) };
            if lo != 0 && lo != hi {
                return Err(ConvergenceError::ChainNotMonotone { index: m.max(m2), arg: n });
            }
        }
        col.insert(m, v);
        Ok(v)
    }
}

/// An element of the model of hypernaturals with moduli.
#[derive(Clone)]
pub enum StarValue {
    /// A sequence of atomic values with a modulus of convergence.
    Atomic { modulus: Modulus, points: Points },
    Fun(Arc<dyn Fn(StarValue) -> CResult<StarValue> + Send + Sync>),
    Pair(Arc<StarValue>, Arc<StarValue>),
}

impl fmt::Debug for StarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarValue::Atomic { .. } => f.write_str("<atomic>"),
            StarValue::Fun(_) => f.write_str("<function>"),
            StarValue::Pair(a, b) => write!(f, "<{a:?}, {b:?}>"),
        }
    }
}

type Family = Arc<dyn Fn(&Term) -> CResult<StarValue> + Send + Sync>;

impl StarValue {
    /// `M_{id,c} = ⟨λh λm. m, λn. c⟩`
    pub fn constant(c: Term) -> StarValue {
        StarValue::Atomic { modulus: Modulus::identity(), points: Points::constant(c) }
    }

    pub fn func<F: Fn(StarValue) -> CResult<StarValue> + Send + Sync + 'static>(f: F) -> StarValue {
        StarValue::Fun(Arc::new(f))
    }

    pub fn atomic(&self) -> CResult<(&Modulus, &Points)> {
        match self {
            StarValue::Atomic { modulus, points } => Ok((modulus, points)),
            _ => Err(ConvergenceError::Shape("an atomic value")),
        }
    }

    pub fn modulus(&self) -> CResult<Modulus> {
        Ok(self.atomic()?.0.clone())
    }

    pub fn points(&self) -> CResult<Points> {
        Ok(self.atomic()?.1.clone())
    }

    pub fn apply(&self, arg: StarValue) -> CResult<StarValue> {
        match self {
            StarValue::Fun(f) => f(arg),
            _ => Err(ConvergenceError::Shape("a function")),
        }
    }

    pub fn proj(&self, i: u8) -> CResult<StarValue> {
        match self {
            StarValue::Pair(a, b) => Ok(if i == 0 { (**a).clone() } else { (**b).clone() }),
            _ => Err(ConvergenceError::Shape("a pair")),
        }
    }
}

/// `H(⟨M, g⟩, N)` at type `ty`: merges the family `a ↦ N_a` along the
/// atomic sequence `⟨M, g⟩`.
pub fn h_lift<F>(base: &StarValue, family: F, ty: &Type) -> CResult<StarValue>
where
    F: Fn(&Term) -> CResult<StarValue> + Send + Sync + 'static,
{
    lift(base, Arc::new(family), ty)
}

fn lift(base: &StarValue, family: Family, ty: &Type) -> CResult<StarValue> {
    let (m, g) = base.atomic()?;
    match ty {
        Type::Arrow(_, b) => {
            let (base, b) = (base.clone(), (**b).clone());
            Ok(StarValue::func(move |l| {
                let fam = family.clone();
                lift(&base, Arc::new(move |a: &Term| fam(a)?.apply(l.clone())), &b)
            }))
        }
        Type::Product(l, r) => {
            let f0 = family.clone();
            let left = lift(base, Arc::new(move |a: &Term| f0(a)?.proj(0)), l)?;
            let right = lift(base, Arc::new(move |a: &Term| family(a)?.proj(1)), r)?;
            Ok(StarValue::Pair(Arc::new(left), Arc::new(right)))
        }
        _ => {
            let fam = family.clone();
            let modulus = h1_merge(m, move |a| fam(a)?.modulus(), g);
            let g = g.clone();
            let points = Points::new(move |n| family(&g.at(n)?)?.points()?.at(n));
            Ok(StarValue::Atomic { modulus, points })
        }
    }
}

/// The interpretation of `Φ` along `chain`: `Φ n` is interpreted by
/// `⟨λh λm. if s_m(n) = s_{h(m)}(n) then m else h(m), λm. s_m(n)⟩`.
pub fn phi_at(chain: &FunChain, n: u64) -> StarValue {
    let c = chain.clone();
    let modulus = Modulus::new(move |h, m| {
        let hm = h.call(m)?;
        Ok(if c.at(m, n)? == c.at(hm, n)? { m } else { hm })
    });
    let c = chain.clone();
    StarValue::Atomic { modulus, points: Points::new(move |m| Ok(Term::num(c.at(m, n)?))) }
}

#[derive(Clone)]
enum Env {
    Nil,
    Cons(Name, StarValue, Arc<Env>),
}

impl Env {
    fn lookup(&self, x: &str) -> Option<&StarValue> {
        let mut e = self;
        while let Env::Cons(y, v, rest) = e {
            if &**y == x {
                return Some(v);
            }
            e = rest;
        }
        None
    }
}

struct Interp {
    sig: Signature,
    chain: FunChain,
    fuel: u64,
}

/// `⟦t⟧` along `chain`: `t` is a term of System T that may mention `Φ`.
/// For atomic closed `t` the result is `⟨M, λm. nf(t[s_m/Φ])⟩` with `M` a
/// modulus of convergence of the point sequence.
pub fn interpret(sig: &Signature, t: &Term, chain: &FunChain) -> CResult<StarValue> {
    let it = Arc::new(Interp { sig: sig.clone(), chain: chain.clone(), fuel: DEFAULT_FUEL });
    it.eval(t, &Arc::new(Env::Nil))
}

/// `⟦t⟧` as a printed term, for inspection: each constant `c` is shown as
/// its interpretation `⟦c⟧`, the rest of the translation is homomorphic.
pub fn render(t: &Term) -> String {
    let shown = t.rewrite(&mut |u| match u {
        Term::Const(c, ty) => Some(Term::Const(format!("⟦{c}⟧").into(), ty.clone())),
        Term::If(ty) => Some(Term::Const("⟦if⟧".into(), ty.clone())),
        Term::Rec(ty) => Some(Term::Const("⟦R⟧".into(), ty.clone())),
        _ => None,
    });
    print_term(&shown)
}

impl Interp {
    fn eval(self: &Arc<Self>, t: &Term, env: &Arc<Env>) -> CResult<StarValue> {
        stacker::maybe_grow(64 * 1024, 1 << 20, || self.eval_inner(t, env))
    }

    fn eval_inner(self: &Arc<Self>, t: &Term, env: &Arc<Env>) -> CResult<StarValue> {
        match t {
            Term::Var(x, _) => env.lookup(x).cloned().ok_or_else(|| ConvergenceError::Unbound(x.to_string())),
            Term::Zero | Term::True | Term::False | Term::StateConst(_) => Ok(StarValue::constant(t.clone())),
            Term::Succ(_) if t.as_num().is_some() => Ok(StarValue::constant(t.clone())),
            Term::Succ(u) => {
                let v = self.eval(u, env)?;
                let (m, g) = v.atomic()?;
                let g = g.clone();
                Ok(StarValue::Atomic {
                    modulus: m.clone(),
                    points: Points::new(move |n| Ok(Term::succ(g.at(n)?))),
                })
            }
            Term::App(u, a) => {
                let f = self.eval(u, env)?;
                f.apply(self.eval(a, env)?)
            }
            Term::Lam(x, _, body) => {
                let (it, x, body, env) = (self.clone(), x.clone(), body.clone(), env.clone());
                Ok(StarValue::func(move |v| it.eval(&body, &Arc::new(Env::Cons(x.clone(), v, env.clone())))))
            }
            Term::Pair(a, b) => Ok(StarValue::Pair(Arc::new(self.eval(a, env)?), Arc::new(self.eval(b, env)?))),
            Term::Proj(i, u) => self.eval(u, env)?.proj(*i),
            Term::If(ty) => Ok(if_value(ty.clone())),
            Term::Rec(ty) => Ok(rec_value(ty.clone())),
            Term::Const(c, ty) if &**c == PHI => {
                if *ty != Type::arrow(Type::Nat, Type::Nat) {
                    return Err(ConvergenceError::Unsupported(format!("{PHI} at type {ty}")));
                }
                let chain = self.chain.clone();
                Ok(StarValue::func(move |base| {
                    let chain = chain.clone();
                    h_lift(
                        &base,
                        move |a| {
                            let n = a.as_num().ok_or_else(|| ConvergenceError::NotAtomic(a.to_string()))?;
                            Ok(phi_at(&chain, n))
                        },
                        &Type::Nat,
                    )
                }))
            }
            Term::Const(c, ty) => self.constant(c, ty),
            Term::Y(_) | Term::Br(..) | Term::BrGuard(..) | Term::Seq(..) | Term::SeqPrim(..) => {
                Err(ConvergenceError::Unsupported(print_term(t)))
            }
        }
    }

    fn constant(self: &Arc<Self>, c: &Name, ty: &Type) -> CResult<StarValue> {
        let def = self.sig.get(c).ok_or_else(|| ConvergenceError::Unsupported(format!("unknown constant {c}")))?;
        let (args, result) = ty.uncurry();
        let first_order = result.is_atomic() && args.iter().all(|a| a.is_atomic());
        match &def.kind {
            ConstKind::Oracle { .. } | ConstKind::Opaque => {
                return Err(ConvergenceError::Unsupported(format!("oracle {c}")));
            }
            ConstKind::Defined(body) if !first_order => return self.eval(body, &Arc::new(Env::Nil)),
            ConstKind::Rule(_) if !first_order => {
                return Err(ConvergenceError::Unsupported(format!("higher-type rule {c}")));
            }
            _ => {}
        }
        let head = Term::Const(c.clone(), ty.clone());
        if args.is_empty() {
            let v = normalize_with_fuel(&self.sig, &head, self.fuel)?.0;
            return Ok(StarValue::constant(v));
        }
        Ok(self.first_order(head, args.len(), Vec::new()))
    }

    /// `⟦c⟧ ⟨L₀, g₀⟩ … ⟨Lₖ, gₖ⟩ = ⟨L₀ ⊔ … ⊔ Lₖ, λn. c (g₀ n) … (gₖ n)⟩`
    fn first_order(self: &Arc<Self>, head: Term, arity: usize, got: Vec<StarValue>) -> StarValue {
        let it = self.clone();
        StarValue::func(move |v| {
            let mut got = got.clone();
            v.atomic()?;
            got.push(v);
            if got.len() < arity {
                return Ok(it.first_order(head.clone(), arity, got));
            }
            let mut modulus = got[0].modulus()?;
            for v in &got[1..] {
                modulus = modulus.join(&v.modulus()?);
            }
            let gs: Vec<Points> = got.iter().map(|v| v.points()).collect::<CResult<_>>()?;
            let (it, head) = (it.clone(), head.clone());
            let points = Points::new(move |n| {
                let args: Vec<Term> = gs.iter().map(|g| g.at(n)).collect::<CResult<_>>()?;
                Ok(normalize_with_fuel(&it.sig, &Term::apps(head.clone(), args), it.fuel)?.0)
            });
            Ok(StarValue::Atomic { modulus, points })
        })
    }
}

/// `⟦if_T⟧ ⟨M, g⟩ L₁ L₂ = H(⟨M, g⟩, λb. if b then L₁ else L₂)`
fn if_value(ty: Type) -> StarValue {
    StarValue::func(move |cond| {
        let ty = ty.clone();
        Ok(StarValue::func(move |l1| {
            let (ty, cond) = (ty.clone(), cond.clone());
            Ok(StarValue::func(move |l2| {
                let l1 = l1.clone();
                h_lift(
                    &cond,
                    move |b| match b.as_bool() {
                        Some(true) => Ok(l1.clone()),
                        Some(false) => Ok(l2.clone()),
                        None => Err(ConvergenceError::NotAtomic(b.to_string())),
                    },
                    &ty,
                )
            }))
        }))
    })
}

/// `⟦R_T⟧ I L ⟨M, g⟩ = H(⟨M, g⟩, N)` with `N_0 = I` and
/// `N_{n+1} = L M_{id,n} N_n`.
fn rec_value(ty: Type) -> StarValue {
    StarValue::func(move |init| {
        let ty = ty.clone();
        Ok(StarValue::func(move |step| {
            let (ty, init) = (ty.clone(), init.clone());
            Ok(StarValue::func(move |count| {
                let memo = Arc::new(Mutex::new(vec![init.clone()]));
                let step = step.clone();
                h_lift(
                    &count,
                    move |a| {
                        let n = a.as_num().ok_or_else(|| ConvergenceError::NotAtomic(a.to_string()))? as usize;
                        let mut ns = memo.lock().expect("recursion memo");
                        while ns.len() <= n {
                            let k = ns.len() - 1;
                            let next = step.apply(StarValue::constant(Term::num(k as u64)))?.apply(ns[k].clone())?;
                            ns.push(next);
                        }
                        Ok(ns[n].clone())
                    },
                    &ty,
                )
            }))
        }))
    })
}

/// `k ↦ M_{id,k}`: used to feed numerals to interpreted functions.
pub fn numeral(n: u64) -> StarValue {
    StarValue::constant(Term::num(n))
}

/// The value of `M_h(z)` for the continuation `λm. m + 1`.
pub fn next_stable(v: &StarValue, z: u64) -> CResult<u64> {
    v.modulus()?.apply(&Fun::plus(1), z)
}
