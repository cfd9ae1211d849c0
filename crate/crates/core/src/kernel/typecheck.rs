use super::error::{KResult, KernelError};
use super::signature::Signature;
use super::term::{Name, SeqOp, Term};
use super::types::Type;

/// Typing context: a stack of variable declarations, innermost last.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    vars: Vec<(Name, Type)>,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn with(mut self, x: &str, ty: Type) -> Ctx {
        self.vars.push((x.into(), ty));
        self
    }

    pub fn push(&mut self, x: Name, ty: Type) {
        self.vars.push((x, ty));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.vars.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }
}

/// `BR` argument types `(T1, T2, T3, T4)` for result `τ` over `σ`.
pub fn br_arg_types(tau: &Type, sigma: &Type) -> [Type; 4] {
    let seq = Type::seq(sigma.clone());
    [
        Type::arrow(Type::arrow(Type::Nat, sigma.clone()), Type::Nat),
        Type::arrow(seq.clone(), tau.clone()),
        Type::arrows(
            [seq.clone(), Type::arrow(sigma.clone(), tau.clone())],
            tau.clone(),
        ),
        seq,
    ]
}

/// The type of a primitive constant node (everything except variables,
/// abstractions, applications, pairs and projections).
pub fn primitive_type(t: &Term) -> Option<Type> {
    Some(match t {
        Term::Zero => Type::Nat,
        Term::True | Term::False => Type::Bool,
        Term::StateConst(_) => Type::State,
        Term::If(ty) => Type::arrows([Type::Bool, ty.clone(), ty.clone()], ty.clone()),
        Term::Rec(ty) => Type::arrows(
            [
                ty.clone(),
                Type::arrows([Type::Nat, ty.clone()], ty.clone()),
                Type::Nat,
            ],
            ty.clone(),
        ),
        Term::Y(a) => Type::arrow(Type::arrow(a.clone(), a.clone()), a.clone()),
        Term::Br(tau, sigma) => Type::arrows(br_arg_types(tau, sigma), tau.clone()),
        Term::BrGuard(tau, sigma) => {
            let mut args = br_arg_types(tau, sigma).to_vec();
            args.push(Type::Bool);
            Type::arrows(args, tau.clone())
        }
        Term::SeqPrim(op, sigma) => {
            let seq = Type::seq(sigma.clone());
            match op {
                SeqOp::Snoc => Type::arrows([seq.clone(), sigma.clone()], seq),
                SeqOp::Len => Type::arrow(seq, Type::Nat),
                SeqOp::Hat => Type::arrows([seq, Type::Nat], sigma.clone()),
            }
        }
        _ => return None,
    })
}

pub fn typecheck(t: &Term, ctx: &Ctx, sig: &Signature) -> KResult<Type> {
    let mut ctx = ctx.clone();
    infer(t, &mut ctx, sig)
}

fn expect(expected: &Type, found: Type, context: &str) -> KResult<()> {
    if *expected == found {
        Ok(())
    } else {
        Err(KernelError::TypeMismatch {
            expected: expected.clone(),
            found,
            context: context.to_string(),
        })
    }
}

fn infer(t: &Term, ctx: &mut Ctx, sig: &Signature) -> KResult<Type> {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || match t {
        Term::Var(x, ty) => {
            let declared = ctx
                .lookup(x)
                .ok_or_else(|| KernelError::UnboundVariable(x.clone()))?;
            expect(declared, ty.clone(), &format!("variable `{x}`"))?;
            Ok(ty.clone())
        }
        Term::Succ(a) => {
            expect(&Type::Nat, infer(a, ctx, sig)?, "successor")?;
            Ok(Type::Nat)
        }
        Term::App(f, a) => {
            let ft = infer(f, ctx, sig)?;
            let (dom, cod) = ft.split_arrow().ok_or_else(|| KernelError::NotAFunction {
                found: ft.clone(),
                context: "application".into(),
            })?;
            let at = infer(a, ctx, sig)?;
            expect(dom, at, "application argument")?;
            Ok(cod.clone())
        }
        Term::Lam(x, ty, b) => {
            ctx.push(x.clone(), ty.clone());
            let bt = infer(b, ctx, sig);
            ctx.pop();
            Ok(Type::arrow(ty.clone(), bt?))
        }
        Term::Pair(a, b) => {
            let at = infer(a, ctx, sig)?;
            Ok(Type::product(at, infer(b, ctx, sig)?))
        }
        Term::Proj(i, p) => {
            let pt = infer(p, ctx, sig)?;
            let (a, b) = pt.split_product().ok_or_else(|| KernelError::NotAProduct {
                found: pt.clone(),
                context: "projection".into(),
            })?;
            Ok(if *i == 0 { a.clone() } else { b.clone() })
        }
        Term::Const(c, ty) => {
            let def = sig.get(c).ok_or_else(|| KernelError::UnknownConstant(c.clone()))?;
            expect(&def.ty, ty.clone(), &format!("constant `{c}`"))?;
            Ok(ty.clone())
        }
        Term::Seq(sigma, xs) => {
            for x in xs {
                expect(sigma, infer(x, ctx, sig)?, "sequence element")?;
            }
            Ok(Type::seq(sigma.clone()))
        }
        other => Ok(primitive_type(other).expect("primitive node")),
    })
}
