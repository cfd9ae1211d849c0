use std::sync::Arc;

use super::error::{KResult, KernelError};
use super::signature::{ConstKind, Signature};
use super::subst::subst;
use super::term::{dummy, fresh_name, SeqOp, Term};
use super::types::Type;

pub const DEFAULT_FUEL: u64 = 1_000_000;

const RED_ZONE: usize = 128 * 1024;
const NEW_STACK: usize = 4 * 1024 * 1024;

/// Normal-order evaluator. Every contraction costs one unit of fuel.
pub struct Machine<'s> {
    pub sig: &'s Signature,
    remaining: u64,
    limit: u64,
}

enum Head {
    Reduced(Term),
    Stuck(Term),
}

fn rebuild(head: Term, args: &[Term]) -> Term {
    Term::apps(head, args.iter().cloned())
}

fn lt_const() -> Term {
    Term::constant("lt", Type::arrows([Type::Nat, Type::Nat], Type::Bool))
}

/// `BRGuard Y G H s (lt (Y (hat s)) (len s))`
fn br_unfold(tau: &Type, sigma: &Type, a: &[Term]) -> Term {
    let s = a[3].clone();
    let hat = Term::app(Term::SeqPrim(SeqOp::Hat, sigma.clone()), s.clone());
    let len = Term::app(Term::SeqPrim(SeqOp::Len, sigma.clone()), s.clone());
    let test = Term::apps(lt_const(), [Term::app(a[0].clone(), hat), len]);
    Term::apps(
        Term::BrGuard(tau.clone(), sigma.clone()),
        [a[0].clone(), a[1].clone(), a[2].clone(), s, test],
    )
}

/// `H s (λx. BR Y G H (snoc s x))`
fn br_continue(tau: &Type, sigma: &Type, a: &[Term]) -> Term {
    let x = fresh_name("x");
    let xv = Term::Var(x.clone(), sigma.clone());
    let snoc = Term::apps(Term::SeqPrim(SeqOp::Snoc, sigma.clone()), [a[3].clone(), xv]);
    let inner = Term::apps(
        Term::Br(tau.clone(), sigma.clone()),
        [a[0].clone(), a[1].clone(), a[2].clone(), snoc],
    );
    Term::apps(a[2].clone(), [a[3].clone(), Term::lam_n(x, sigma.clone(), inner)])
}

/// Contracts a redex whose head and arguments are already in the shape the
/// rule needs. Shared by the single-step strategies.
fn contract_ready(m: &mut Machine<'_>, head: &Term, args: &[Term]) -> KResult<Option<(Term, usize)>> {
    let r = match head {
        Term::Lam(x, _, b) if !args.is_empty() => Some((subst(b, x, &args[0]), 1)),
        Term::Proj(i, p) => match &**p {
            Term::Pair(a, b) => Some((if *i == 0 { (**a).clone() } else { (**b).clone() }, 0)),
            _ => None,
        },
        Term::If(_) if args.len() >= 3 => match args[0] {
            Term::True => Some((args[1].clone(), 3)),
            Term::False => Some((args[2].clone(), 3)),
            _ => None,
        },
        Term::Rec(ty) if args.len() >= 3 => match &args[2] {
            Term::Zero => Some((args[0].clone(), 3)),
            Term::Succ(n) => {
                let n = (**n).clone();
                let again = Term::rec(ty.clone(), args[0].clone(), args[1].clone(), n.clone());
                Some((Term::apps(args[1].clone(), [n, again]), 3))
            }
            _ => None,
        },
        Term::Y(ty) if !args.is_empty() => {
            let yu = Term::app(Term::Y(ty.clone()), args[0].clone());
            Some((Term::app(args[0].clone(), yu), 1))
        }
        Term::Br(tau, sigma) if args.len() >= 4 => Some((br_unfold(tau, sigma, args), 4)),
        Term::BrGuard(tau, sigma) if args.len() >= 5 => match args[4] {
            Term::True => Some((Term::app(args[1].clone(), args[3].clone()), 5)),
            Term::False => Some((br_continue(tau, sigma, args), 5)),
            _ => None,
        },
        Term::SeqPrim(op, sigma) => seq_prim(*op, sigma, args),
        Term::Const(c, _) => {
            let def = m.sig.get(c).ok_or_else(|| KernelError::UnknownConstant(c.clone()))?;
            if !def.has_rule() || args.len() < def.arity || !args[..def.arity].iter().all(Term::is_value) {
                None
            } else {
                Some((m.apply_const(c, &args[..def.arity])?, def.arity))
            }
        }
        _ => None,
    };
    Ok(r)
}

fn seq_prim(op: SeqOp, sigma: &Type, args: &[Term]) -> Option<(Term, usize)> {
    match op {
        SeqOp::Snoc if args.len() >= 2 => match &args[0] {
            Term::Seq(ty, xs) => {
                let mut ys = xs.clone();
                ys.push(args[1].clone());
                Some((Term::Seq(ty.clone(), ys), 2))
            }
            _ => None,
        },
        SeqOp::Len if !args.is_empty() => match &args[0] {
            Term::Seq(_, xs) => Some((Term::num(xs.len() as u64), 1)),
            _ => None,
        },
        SeqOp::Hat if args.len() >= 2 => match (&args[0], args[1].as_num()) {
            (Term::Seq(_, xs), Some(n)) => {
                let v = xs.get(n as usize).cloned().unwrap_or_else(|| dummy(sigma));
                Some((v, 2))
            }
            _ => None,
        },
        _ => None,
    }
}

impl<'s> Machine<'s> {
    pub fn new(sig: &'s Signature, fuel: u64) -> Machine<'s> {
        Machine { sig, remaining: fuel, limit: fuel }
    }

    pub fn steps_used(&self) -> u64 {
        self.limit - self.remaining
    }

    fn tick(&mut self) -> KResult<()> {
        if self.remaining == 0 {
            return Err(KernelError::FuelExhausted { limit: self.limit });
        }
        self.remaining -= 1;
        Ok(())
    }

    /// Applies a functional constant to closed normal arguments.
    pub fn apply_const(&mut self, name: &str, args: &[Term]) -> KResult<Term> {
        let def = self
            .sig
            .get(name)
            .ok_or_else(|| KernelError::UnknownConstant(name.into()))?
            .clone();
        match &def.kind {
            ConstKind::Rule(f) => f(self, args),
            ConstKind::Defined(body) => {
                if let Some(v) = def.memo_get(args) {
                    return Ok(v);
                }
                let v = self.normalize(&Term::apps(body.clone(), args.iter().cloned()))?;
                def.memo_put(args, &v);
                Ok(v)
            }
            _ => Err(KernelError::RuleFailure {
                constant: def.name.clone(),
                msg: "constant has no rule".into(),
            }),
        }
    }

    /// Evaluates `P(args, witness)`.
    pub fn eval_predicate(&mut self, pred: &str, args: &[u64], witness: u64) -> KResult<bool> {
        let mut vals: Vec<Term> = args.iter().map(|n| Term::num(*n)).collect();
        vals.push(Term::num(witness));
        let v = self.apply_const(pred, &vals)?;
        v.as_bool().ok_or_else(|| KernelError::RuleFailure {
            constant: pred.into(),
            msg: format!("predicate did not evaluate to a boolean: {}", super::syntax::print_term(&v)),
        })
    }

    /// Weak head normal form by leftmost-outermost contraction.
    pub fn whnf(&mut self, t: &Term) -> KResult<Term> {
        let mut cur = t.clone();
        loop {
            match self.head_step(&cur)? {
                Head::Reduced(next) => {
                    self.tick()?;
                    cur = next;
                }
                Head::Stuck(t) => return Ok(t),
            }
        }
    }

    fn head_step(&mut self, t: &Term) -> KResult<Head> {
        stacker::maybe_grow(RED_ZONE, NEW_STACK, || self.head_step_inner(t))
    }

    fn head_step_inner(&mut self, t: &Term) -> KResult<Head> {
        let (head, args) = t.spine();
        let mut args: Vec<Term> = args.into_iter().cloned().collect();
        let need = match head {
            Term::Lam(..) | Term::Y(_) => 1,
            Term::Proj(..) => 0,
            Term::If(_) | Term::Rec(_) => 3,
            Term::Br(..) => 4,
            Term::BrGuard(..) => 5,
            Term::SeqPrim(SeqOp::Len, _) => 1,
            Term::SeqPrim(..) => 2,
            Term::Const(c, _) => {
                let def = self.sig.get(c).ok_or_else(|| KernelError::UnknownConstant(c.clone()))?;
                if !def.has_rule() {
                    return Ok(Head::Stuck(t.clone()));
                }
                def.arity
            }
            _ => return Ok(Head::Stuck(t.clone())),
        };
        if args.len() < need {
            return Ok(Head::Stuck(t.clone()));
        }
        let mut head = head.clone();
        // Bring the scrutinised positions into shape.
        match &head {
            Term::Proj(i, p) => {
                let p2 = self.whnf(p)?;
                head = Term::Proj(*i, Arc::new(p2));
            }
            Term::If(_) => args[0] = self.whnf(&args[0])?,
            Term::Rec(_) => args[2] = self.whnf(&args[2])?,
            Term::BrGuard(..) => args[4] = self.whnf(&args[4])?,
            Term::SeqPrim(op, _) => {
                args[0] = self.whnf(&args[0])?;
                if *op == SeqOp::Hat {
                    args[1] = self.normalize(&args[1])?;
                }
            }
            Term::Const(..) => {
                for a in args.iter_mut().take(need) {
                    *a = self.normalize(a)?;
                }
            }
            _ => {}
        }
        match contract_ready(self, &head, &args)? {
            Some((r, used)) => Ok(Head::Reduced(rebuild(r, &args[used..]))),
            None => Ok(Head::Stuck(rebuild(head, &args))),
        }
    }

    /// Full normal form (normal order: head first, then subterms left to
    /// right, including under binders and inside pairs).
    pub fn normalize(&mut self, t: &Term) -> KResult<Term> {
        stacker::maybe_grow(RED_ZONE, NEW_STACK, || self.normalize_inner(t))
    }

    fn normalize_inner(&mut self, t: &Term) -> KResult<Term> {
        let w = self.whnf(t)?;
        Ok(match &w {
            Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Arc::new(self.normalize(b)?)),
            Term::Pair(a, b) => {
                let a = self.normalize(a)?;
                Term::pair(a, self.normalize(b)?)
            }
            Term::Succ(_) => {
                // Walk numerals iteratively.
                let mut depth = 0u64;
                let mut cur = &w;
                while let Term::Succ(inner) = cur {
                    depth += 1;
                    cur = inner;
                }
                if matches!(cur, Term::Zero) {
                    return Ok(w);
                }
                let mut base = self.normalize(cur)?;
                for _ in 0..depth {
                    base = Term::succ(base);
                }
                base
            }
            Term::Proj(i, p) => Term::proj(*i, self.normalize(p)?),
            Term::Seq(ty, xs) => Term::Seq(
                ty.clone(),
                xs.iter().map(|x| self.normalize(x)).collect::<KResult<_>>()?,
            ),
            Term::App(..) => {
                let (head, args) = w.spine();
                let head = match head {
                    Term::Proj(i, p) => Term::proj(*i, self.normalize(p)?),
                    other => other.clone(),
                };
                let mut out = head;
                for a in args {
                    out = Term::app(out, self.normalize(a)?);
                }
                out
            }
            _ => w,
        })
    }
}

/// Normal form with the default fuel.
pub fn normalize(sig: &Signature, t: &Term) -> KResult<Term> {
    Machine::new(sig, DEFAULT_FUEL).normalize(t)
}

pub fn normalize_with_fuel(sig: &Signature, t: &Term, fuel: u64) -> KResult<(Term, u64)> {
    let mut m = Machine::new(sig, fuel);
    let r = m.normalize(t)?;
    Ok((r, m.steps_used()))
}

/// Reduction strategy for single steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    RightmostInnermost,
}

/// One leftmost-outermost contraction, or `None` for a normal form.
pub fn step(sig: &Signature, t: &Term) -> KResult<Option<Term>> {
    step_with(sig, t, Strategy::LeftmostOutermost)
}

pub fn step_with(sig: &Signature, t: &Term, strategy: Strategy) -> KResult<Option<Term>> {
    let mut m = Machine::new(sig, DEFAULT_FUEL);
    match strategy {
        Strategy::LeftmostOutermost => step_lo(&mut m, t),
        Strategy::RightmostInnermost => step_ri(&mut m, t),
    }
}

/// Iterates single steps until a normal form.
pub fn normalize_by_steps(sig: &Signature, t: &Term, strategy: Strategy, fuel: u64) -> KResult<(Term, u64)> {
    let mut cur = t.clone();
    let mut n = 0;
    while let Some(next) = step_with(sig, &cur, strategy)? {
        n += 1;
        if n > fuel {
            return Err(KernelError::FuelExhausted { limit: fuel });
        }
        cur = next;
    }
    Ok((cur, n))
}

fn step_lo(m: &mut Machine<'_>, t: &Term) -> KResult<Option<Term>> {
    stacker::maybe_grow(RED_ZONE, NEW_STACK, || {
        let (head, args) = t.spine();
        let args: Vec<Term> = args.into_iter().cloned().collect();
        if let Some((r, used)) = contract_ready(m, head, &args)? {
            return Ok(Some(rebuild(r, &args[used..])));
        }
        if let Some(h) = step_inside(m, head, step_lo, false)? {
            return Ok(Some(rebuild(h, &args)));
        }
        for i in 0..args.len() {
            if let Some(a) = step_lo(m, &args[i])? {
                let mut args = args.clone();
                args[i] = a;
                return Ok(Some(rebuild(head.clone(), &args)));
            }
        }
        Ok(None)
    })
}

fn step_ri(m: &mut Machine<'_>, t: &Term) -> KResult<Option<Term>> {
    stacker::maybe_grow(RED_ZONE, NEW_STACK, || {
        let (head, args) = t.spine();
        let args: Vec<Term> = args.into_iter().cloned().collect();
        for i in (0..args.len()).rev() {
            if let Some(a) = step_ri(m, &args[i])? {
                let mut args = args.clone();
                args[i] = a;
                return Ok(Some(rebuild(head.clone(), &args)));
            }
        }
        if let Some(h) = step_inside(m, head, step_ri, true)? {
            return Ok(Some(rebuild(h, &args)));
        }
        if let Some((r, used)) = contract_ready(m, head, &args)? {
            return Ok(Some(rebuild(r, &args[used..])));
        }
        Ok(None)
    })
}

type StepFn = fn(&mut Machine<'_>, &Term) -> KResult<Option<Term>>;

/// Steps inside a non-application head.
fn step_inside(m: &mut Machine<'_>, head: &Term, f: StepFn, right_first: bool) -> KResult<Option<Term>> {
    Ok(match head {
        Term::Lam(x, ty, b) => f(m, b)?.map(|b| Term::lam_n(x.clone(), ty.clone(), b)),
        Term::Proj(i, p) => f(m, p)?.map(|p| Term::proj(*i, p)),
        Term::Succ(p) => f(m, p)?.map(Term::succ),
        Term::Pair(a, b) => {
            if right_first {
                if let Some(b2) = f(m, b)? {
                    Some(Term::pair((**a).clone(), b2))
                } else {
                    f(m, a)?.map(|a2| Term::pair(a2, (**b).clone()))
                }
            } else if let Some(a2) = f(m, a)? {
                Some(Term::pair(a2, (**b).clone()))
            } else {
                f(m, b)?.map(|b2| Term::pair((**a).clone(), b2))
            }
        }
        Term::Seq(ty, xs) => {
            let order: Vec<usize> = if right_first {
                (0..xs.len()).rev().collect()
            } else {
                (0..xs.len()).collect()
            };
            let mut out = None;
            for i in order {
                if let Some(x2) = f(m, &xs[i])? {
                    let mut ys = xs.clone();
                    ys[i] = x2;
                    out = Some(Term::Seq(ty.clone(), ys));
                    break;
                }
            }
            out
        }
        _ => None,
    })
}
