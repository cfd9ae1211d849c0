//! Surface syntax for types and terms.
//!
//! Types: `Nat`, `Bool`, `State`, `(-> A B ...)`, `(* A B)`, `(seq A)`.
//! Terms: numerals, `true`, `false`, `(S t)`, `(lam (x T) ... body)`,
//! `(app f a ...)` or `(f a ...)`, `(pair a b)`, `(proj0 t)`, `(proj1 t)`,
//! `(rec T)`, `(if T)`, `(Y T)`, `(br τ σ)`, `(brguard τ σ)`, `(const c)`,
//! `(var x T)`, `(seq σ a ...)`, `(snoc σ)`, `(len σ)`, `(hat σ)` and state
//! literals `{(P 3 5) ...}`.

use std::fmt::Write;

use super::error::{KResult, KernelError};
use super::signature::Signature;
use super::term::{Name, SeqOp, Term};
use super::types::Type;
use crate::sexp::{self, Sexp, SexpError};
use crate::states::KnowledgeState;

pub const KEYWORDS: &[&str] = &[
    "lam", "app", "pair", "proj0", "proj1", "rec", "if", "Y", "br", "brguard", "const", "var", "S",
    "seq", "snoc", "len", "hat", "true", "false",
];

impl From<SexpError> for KernelError {
    fn from(e: SexpError) -> KernelError {
        KernelError::Syntax { line: e.line, col: e.col, msg: e.msg }
    }
}

fn syn(s: &Sexp, msg: impl Into<String>) -> KernelError {
    s.err(msg).into()
}

pub fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !KEYWORDS.contains(&s)
        && s.parse::<u64>().is_err()
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

pub fn parse_type(src: &str) -> KResult<Type> {
    type_from_sexp(&sexp::read_one(src)?)
}

pub fn type_from_sexp(s: &Sexp) -> KResult<Type> {
    match s {
        Sexp::Atom(a, _) => match a.as_str() {
            "Nat" => Ok(Type::Nat),
            "Bool" => Ok(Type::Bool),
            "State" => Ok(Type::State),
            _ => Err(syn(s, format!("unknown type `{a}`"))),
        },
        Sexp::List(xs, _) => {
            let head = xs.first().and_then(Sexp::atom).ok_or_else(|| syn(s, "malformed type"))?;
            let parts: Vec<Type> = xs[1..].iter().map(type_from_sexp).collect::<KResult<_>>()?;
            match (head, parts.len()) {
                ("->", n) if n >= 2 => {
                    let mut it = parts.into_iter().rev();
                    let last = it.next().expect("n >= 2");
                    Ok(it.fold(last, |acc, a| Type::arrow(a, acc)))
                }
                ("*", 2) => Ok(Type::product(parts[0].clone(), parts[1].clone())),
                ("seq", 1) => Ok(Type::seq(parts[0].clone())),
                _ => Err(syn(s, "malformed type")),
            }
        }
        Sexp::Brace(..) => Err(syn(s, "unexpected state literal in type")),
    }
}

/// Parser state: the signature, binders in scope and the treatment of
/// unknown symbols.
pub struct TermParser<'a> {
    pub sig: &'a Signature,
    bound: Vec<(Name, Type)>,
    /// Unknown symbols are read as variables of type `Nat` (formula mode).
    pub implicit_nat: bool,
}

impl<'a> TermParser<'a> {
    pub fn new(sig: &'a Signature) -> TermParser<'a> {
        TermParser { sig, bound: Vec::new(), implicit_nat: false }
    }

    pub fn bind(&mut self, x: Name, ty: Type) {
        self.bound.push((x, ty));
    }

    pub fn unbind(&mut self) {
        self.bound.pop();
    }

    fn lookup(&self, x: &str) -> Option<&Type> {
        self.bound.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    fn symbol(&self, s: &Sexp, a: &str) -> KResult<Term> {
        if let Some(ty) = self.lookup(a) {
            return Ok(Term::Var(a.into(), ty.clone()));
        }
        if let Some(def) = self.sig.get(a) {
            return Ok(Term::Const(def.name.clone(), def.ty.clone()));
        }
        if self.implicit_nat && is_name(a) {
            return Ok(Term::var(a, Type::Nat));
        }
        Err(syn(s, format!("unknown symbol `{a}`")))
    }

    pub fn term(&mut self, s: &Sexp) -> KResult<Term> {
        match s {
            Sexp::Atom(a, _) => {
                if let Ok(n) = a.parse::<u64>() {
                    return Ok(Term::num(n));
                }
                match a.as_str() {
                    "true" => Ok(Term::True),
                    "false" => Ok(Term::False),
                    _ => self.symbol(s, a),
                }
            }
            Sexp::Brace(items, _) => self.state_literal(items).map(Term::StateConst),
            Sexp::List(xs, _) => self.list(s, xs),
        }
    }

    fn state_literal(&self, items: &[Sexp]) -> KResult<KnowledgeState> {
        let mut atoms = Vec::new();
        for it in items {
            let xs = it.list().ok_or_else(|| syn(it, "expected an atom `(P args.. w)`"))?;
            let p = xs.first().and_then(Sexp::atom).ok_or_else(|| syn(it, "expected a predicate"))?;
            let mut nums = Vec::new();
            for x in &xs[1..] {
                nums.push(x.num().ok_or_else(|| syn(x, "expected a numeral"))?);
            }
            let w = nums.pop().ok_or_else(|| syn(it, "atom needs a witness"))?;
            atoms.push((p.to_string(), nums, w));
        }
        self.sig.state(atoms)
    }

    fn list(&mut self, s: &Sexp, xs: &[Sexp]) -> KResult<Term> {
        let Some(head) = xs.first() else {
            return Err(syn(s, "empty list"));
        };
        let args = &xs[1..];
        let kw = head.atom().filter(|a| KEYWORDS.contains(a) && self.lookup(a).is_none());
        let arity_err = || syn(s, "wrong number of arguments");
        match kw {
            Some("lam") => {
                if args.len() < 2 {
                    return Err(arity_err());
                }
                let binders = &args[..args.len() - 1];
                let mut names = Vec::new();
                for b in binders {
                    let bx = b.list().filter(|l| l.len() == 2).ok_or_else(|| syn(b, "binder `(x T)` expected"))?;
                    let x = bx[0].atom().filter(|a| is_name(a)).ok_or_else(|| syn(&bx[0], "bad binder name"))?;
                    let ty = type_from_sexp(&bx[1])?;
                    names.push((Name::from(x), ty));
                }
                for (x, ty) in &names {
                    self.bind(x.clone(), ty.clone());
                }
                let body = self.term(&args[args.len() - 1]);
                for _ in &names {
                    self.unbind();
                }
                let mut t = body?;
                for (x, ty) in names.into_iter().rev() {
                    t = Term::lam_n(x, ty, t);
                }
                Ok(t)
            }
            Some("app") => {
                if args.is_empty() {
                    return Err(arity_err());
                }
                let f = self.term(&args[0])?;
                let rest = args[1..].iter().map(|a| self.term(a)).collect::<KResult<Vec<_>>>()?;
                Ok(Term::apps(f, rest))
            }
            Some("pair") if args.len() == 2 => {
                let a = self.term(&args[0])?;
                Ok(Term::pair(a, self.term(&args[1])?))
            }
            Some("proj0") if args.len() == 1 => Ok(Term::proj(0, self.term(&args[0])?)),
            Some("proj1") if args.len() == 1 => Ok(Term::proj(1, self.term(&args[0])?)),
            Some("S") if args.len() == 1 => Ok(Term::succ(self.term(&args[0])?)),
            Some("rec") if args.len() == 1 => Ok(Term::Rec(type_from_sexp(&args[0])?)),
            Some("if") if args.len() == 1 => Ok(Term::If(type_from_sexp(&args[0])?)),
            Some("Y") if args.len() == 1 => Ok(Term::Y(type_from_sexp(&args[0])?)),
            Some("br") if args.len() == 2 => Ok(Term::Br(type_from_sexp(&args[0])?, type_from_sexp(&args[1])?)),
            Some("brguard") if args.len() == 2 => {
                Ok(Term::BrGuard(type_from_sexp(&args[0])?, type_from_sexp(&args[1])?))
            }
            Some("snoc") if args.len() == 1 => Ok(Term::SeqPrim(SeqOp::Snoc, type_from_sexp(&args[0])?)),
            Some("len") if args.len() == 1 => Ok(Term::SeqPrim(SeqOp::Len, type_from_sexp(&args[0])?)),
            Some("hat") if args.len() == 1 => Ok(Term::SeqPrim(SeqOp::Hat, type_from_sexp(&args[0])?)),
            Some("seq") if !args.is_empty() => {
                let ty = type_from_sexp(&args[0])?;
                let items = args[1..].iter().map(|a| self.term(a)).collect::<KResult<Vec<_>>>()?;
                Ok(Term::Seq(ty, items))
            }
            Some("const") if args.len() == 1 => {
                let c = args[0].atom().ok_or_else(|| syn(&args[0], "constant name expected"))?;
                let def = self.sig.get(c).ok_or_else(|| KernelError::UnknownConstant(c.into()))?;
                Ok(Term::Const(def.name.clone(), def.ty.clone()))
            }
            Some("var") if args.len() == 2 => {
                let x = args[0].atom().filter(|a| is_name(a)).ok_or_else(|| syn(&args[0], "variable name expected"))?;
                Ok(Term::var(x, type_from_sexp(&args[1])?))
            }
            Some(_) => Err(arity_err()),
            None => {
                // `(f a b)` application sugar.
                let f = self.term(head)?;
                if args.is_empty() {
                    return Err(syn(s, "application without arguments"));
                }
                let rest = args.iter().map(|a| self.term(a)).collect::<KResult<Vec<_>>>()?;
                Ok(Term::apps(f, rest))
            }
        }
    }
}

pub fn parse_term(sig: &Signature, src: &str) -> KResult<Term> {
    TermParser::new(sig).term(&sexp::read_one(src)?)
}

/// Parses a term whose free variables are declared in `ctx`.
pub fn parse_term_in(sig: &Signature, ctx: &[(&str, Type)], src: &str) -> KResult<Term> {
    let mut p = TermParser::new(sig);
    for (x, ty) in ctx {
        p.bind((*x).into(), ty.clone());
    }
    p.term(&sexp::read_one(src)?)
}

/// Printing options.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOpts {
    /// Print free variables as bare symbols instead of `(var x T)`.
    pub bare_free: bool,
}

pub fn print_term(t: &Term) -> String {
    print_term_with(t, PrintOpts::default(), &[])
}

/// Prints with `scope` treated as bound names.
pub fn print_term_with(t: &Term, opts: PrintOpts, scope: &[Name]) -> String {
    let mut out = String::new();
    let mut bound: Vec<Name> = scope.to_vec();
    emit(t, opts, &mut bound, &mut out);
    out
}

fn emit(t: &Term, opts: PrintOpts, bound: &mut Vec<Name>, out: &mut String) {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || emit_inner(t, opts, bound, out))
}

fn emit_inner(t: &Term, opts: PrintOpts, bound: &mut Vec<Name>, out: &mut String) {
    if let Some(n) = t.as_num() {
        let _ = write!(out, "{n}");
        return;
    }
    match t {
        Term::Var(x, ty) => {
            if bound.contains(x) || (opts.bare_free && *ty == Type::Nat && is_name(x)) {
                out.push_str(x);
            } else {
                let _ = write!(out, "(var {x} {ty})");
            }
        }
        Term::Zero => out.push('0'),
        Term::Succ(a) => {
            out.push_str("(S ");
            emit(a, opts, bound, out);
            out.push(')');
        }
        Term::True => out.push_str("true"),
        Term::False => out.push_str("false"),
        Term::If(ty) => {
            let _ = write!(out, "(if {ty})");
        }
        Term::Rec(ty) => {
            let _ = write!(out, "(rec {ty})");
        }
        Term::Y(ty) => {
            let _ = write!(out, "(Y {ty})");
        }
        Term::Br(a, b) => {
            let _ = write!(out, "(br {a} {b})");
        }
        Term::BrGuard(a, b) => {
            let _ = write!(out, "(brguard {a} {b})");
        }
        Term::SeqPrim(op, ty) => {
            let name = match op {
                SeqOp::Snoc => "snoc",
                SeqOp::Len => "len",
                SeqOp::Hat => "hat",
            };
            let _ = write!(out, "({name} {ty})");
        }
        Term::Seq(ty, xs) => {
            let _ = write!(out, "(seq {ty}");
            for x in xs {
                out.push(' ');
                emit(x, opts, bound, out);
            }
            out.push(')');
        }
        Term::Const(c, _) => {
            if bound.contains(c) || !is_name(c) {
                let _ = write!(out, "(const {c})");
            } else {
                out.push_str(c);
            }
        }
        Term::StateConst(s) => {
            let _ = write!(out, "{s}");
        }
        Term::Lam(..) => {
            out.push_str("(lam");
            let mut cur = t;
            let mut pushed = 0;
            while let Term::Lam(x, ty, b) = cur {
                let _ = write!(out, " ({x} {ty})");
                bound.push(x.clone());
                pushed += 1;
                cur = b;
            }
            out.push(' ');
            emit(cur, opts, bound, out);
            for _ in 0..pushed {
                bound.pop();
            }
            out.push(')');
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            let sugar = match head {
                Term::Const(c, _) => !bound.contains(c) && is_name(c),
                Term::Var(x, ty) => bound.contains(x) || (opts.bare_free && *ty == Type::Nat && is_name(x)),
                _ => false,
            };
            out.push('(');
            if !sugar {
                out.push_str("app ");
            }
            emit(head, opts, bound, out);
            for a in args {
                out.push(' ');
                emit(a, opts, bound, out);
            }
            out.push(')');
        }
        Term::Pair(a, b) => {
            out.push_str("(pair ");
            emit(a, opts, bound, out);
            out.push(' ');
            emit(b, opts, bound, out);
            out.push(')');
        }
        Term::Proj(i, a) => {
            let _ = write!(out, "(proj{i} ");
            emit(a, opts, bound, out);
            out.push(')');
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_term(self))
    }
}
