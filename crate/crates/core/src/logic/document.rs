//! Proof documents: definitions of functions and predicates, formula
//! abbreviations, lemmas and theorems.
//!
//! ```text
//! (table f 5 2 3 0)                       ; f(x) = list[x], 0 beyond
//! (fun g (x y) (plus x (times 2 y)))      ; first-order definition
//! (inline h (x) (f (S x)))                ; unfolded inside formulas
//! (pred P (x) y (eq x (times y y)))       ; P(x, y), witness y last
//! (post-rule weaken ((lt ?a ?b)) (le ?a ?b))
//! (formula Sq (n) (ex y (atom P n y)))    ; abbreviation
//! (lemma L <formula> <proof>)             ; reusable with (use L)
//! (theorem T <formula> <proof>)
//! (term t <term>)                         ; named closed term
//! ```

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::kernel::{
    is_name, type_from_sexp, typecheck, Ctx, KernelError, Name, Signature, Term, TermParser, Type,
};
use crate::sexp::{self, Sexp};

use super::error::{LResult, LogicError};
use super::formula::Formula;
use super::post::{Pat, PostTable};
use super::proof::Proof;

#[derive(Clone, Debug)]
pub struct Macro {
    pub params: Vec<Name>,
    pub body: Formula,
}

#[derive(Clone, Debug)]
pub struct Theorem {
    pub name: String,
    pub formula: Formula,
    pub proof: Proof,
}

/// Definitions that replace those in the document, e.g. a sample function
/// supplied on the command line.
pub type Overrides = BTreeMap<String, Vec<u64>>;

#[derive(Clone, Debug)]
pub struct Document {
    pub sig: Signature,
    pub posts: PostTable,
    pub macros: BTreeMap<String, Macro>,
    pub lemmas: IndexMap<String, Theorem>,
    pub theorems: Vec<Theorem>,
    pub terms: IndexMap<String, Term>,
}

fn syn(s: &Sexp, msg: impl Into<String>) -> LogicError {
    s.err(msg).into()
}

const PROOF_KEYWORDS: &[&str] = &[
    "hyp", "and-i", "and-e0", "and-e1", "imp-i", "imp-e", "or-i0", "or-i1", "or-e", "all-i", "all-e", "ex-i",
    "ex-e", "ind", "post", "ax", "em1", "chi-ax", "phi-ax", "use",
];

impl Default for Document {
    fn default() -> Self {
        Document::with_signature(Signature::prelude())
    }
}

impl Document {
    pub fn with_signature(sig: Signature) -> Document {
        Document {
            sig,
            posts: PostTable::default(),
            macros: BTreeMap::new(),
            lemmas: IndexMap::new(),
            theorems: Vec::new(),
            terms: IndexMap::new(),
        }
    }

    pub fn parse(src: &str) -> LResult<Document> {
        Document::parse_with(src, &Overrides::new())
    }

    pub fn parse_with(src: &str, overrides: &Overrides) -> LResult<Document> {
        let mut doc = Document::default();
        doc.load(src, overrides)?;
        Ok(doc)
    }

    /// Adds the declarations of `src` to this document.
    pub fn load(&mut self, src: &str, overrides: &Overrides) -> LResult<()> {
        let mut defined_overrides = Vec::new();
        for decl in sexp::read_all(src)? {
            self.declaration(&decl, overrides, &mut defined_overrides)?;
        }
        match overrides.keys().find(|k| !defined_overrides.contains(k)) {
            Some(k) => Err(LogicError::Unknown { kind: "function", name: k.clone() }),
            None => Ok(()),
        }
    }

    fn declaration(&mut self, d: &Sexp, overrides: &Overrides, done: &mut Vec<String>) -> LResult<()> {
        let xs = d.list().ok_or_else(|| syn(d, "declaration expected"))?;
        let kw = d.head().ok_or_else(|| syn(d, "declaration expected"))?;
        let name = xs
            .get(1)
            .and_then(Sexp::atom)
            .filter(|n| is_name(n))
            .ok_or_else(|| syn(d, "declaration needs a name"))?
            .to_string();
        if matches!(kw, "table" | "fun" | "inline" | "pred") && self.sig.contains(&name) {
            return Err(KernelError::DuplicateConstant(name.as_str().into()).into());
        }
        match kw {
            "table" | "fun" if overrides.contains_key(&name) => {
                self.sig.add_table(&name, &overrides[&name]);
                done.push(name);
            }
            "table" => {
                let vals = xs[2..]
                    .iter()
                    .map(|x| x.num().ok_or_else(|| syn(x, "numeral expected")))
                    .collect::<LResult<Vec<_>>>()?;
                self.sig.add_table(&name, &vals);
            }
            "fun" | "inline" => {
                let [_, _, params, body] = xs else {
                    return Err(syn(d, format!("expected ({kw} name (params) body)")));
                };
                let params = self.param_list(params)?;
                let mut p = TermParser::new(&self.sig);
                for x in &params {
                    p.bind(x.clone(), Type::Nat);
                }
                let body = p.term(body)?;
                let mut ctx = Ctx::new();
                for x in &params {
                    ctx.push(x.clone(), Type::Nat);
                }
                let res = typecheck(&body, &ctx, &self.sig)?;
                let mut lam = body;
                for x in params.iter().rev() {
                    lam = Term::lam_n(x.clone(), Type::Nat, lam);
                }
                let ty = Type::arrows(vec![Type::Nat; params.len()], res);
                self.sig.add_defined(&name, ty, lam, kw == "inline");
            }
            "pred" => {
                let [_, _, params, witness, body] = xs else {
                    return Err(syn(d, "expected (pred name (params) witness body)"));
                };
                let mut params = self.param_list(params)?;
                let w = witness
                    .atom()
                    .filter(|a| is_name(a))
                    .ok_or_else(|| syn(witness, "witness variable expected"))?;
                let k = params.len();
                params.push(w.into());
                let mut p = TermParser::new(&self.sig);
                for x in &params {
                    p.bind(x.clone(), Type::Nat);
                }
                let body_t = p.term(body)?;
                let mut ctx = Ctx::new();
                for x in &params {
                    ctx.push(x.clone(), Type::Nat);
                }
                let ty = typecheck(&body_t, &ctx, &self.sig)?;
                if ty != Type::Bool {
                    return Err(KernelError::TypeMismatch {
                        expected: Type::Bool,
                        found: ty,
                        context: format!("predicate `{name}`"),
                    }
                    .into());
                }
                let mut lam = body_t;
                for x in params.iter().rev() {
                    lam = Term::lam_n(x.clone(), Type::Nat, lam);
                }
                self.sig.add_predicate(&name, k, lam)?;
            }
            "post-rule" => {
                let [_, _, premises, conclusion] = xs else {
                    return Err(syn(d, "expected (post-rule name (premises) conclusion)"));
                };
                let ps = premises
                    .list()
                    .ok_or_else(|| syn(premises, "premise list expected"))?
                    .iter()
                    .map(|p| Pat::parse(&p.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                let c = Pat::parse(&conclusion.to_string())?;
                self.posts.register(&self.sig, &name, ps, c)?;
            }
            "formula" => {
                let [_, _, params, body] = xs else {
                    return Err(syn(d, "expected (formula name (params) body)"));
                };
                let params = self.param_list(params)?;
                let body = self.formula(body)?;
                self.macros.insert(name, Macro { params, body });
            }
            "lemma" | "theorem" => {
                let [_, _, f, p] = xs else {
                    return Err(syn(d, format!("expected ({kw} name formula proof)")));
                };
                let formula = self.formula(f)?;
                let proof = self.proof(p)?;
                let th = Theorem { name: name.clone(), formula, proof };
                if kw == "lemma" {
                    self.lemmas.insert(name, th);
                } else {
                    self.theorems.push(th);
                }
            }
            "term" => {
                let [_, _, t] = xs else {
                    return Err(syn(d, "expected (term name term)"));
                };
                let t = self.term(t)?;
                self.terms.insert(name, t);
            }
            other => return Err(syn(d, format!("unknown declaration `{other}`"))),
        }
        Ok(())
    }

    fn param_list(&self, s: &Sexp) -> LResult<Vec<Name>> {
        s.list()
            .ok_or_else(|| syn(s, "parameter list expected"))?
            .iter()
            .map(|x| {
                x.atom()
                    .filter(|a| is_name(a))
                    .map(Name::from)
                    .ok_or_else(|| syn(x, "parameter name expected"))
            })
            .collect()
    }

    /// The last theorem.
    pub fn main(&self) -> Option<&Theorem> {
        self.theorems.last()
    }

    pub fn theorem(&self, name: &str) -> Option<&Theorem> {
        self.theorems.iter().find(|t| t.name == name).or_else(|| self.lemmas.get(name))
    }

    /// A term whose unknown symbols are individual variables.
    pub fn term(&self, s: &Sexp) -> LResult<Term> {
        let mut p = TermParser::new(&self.sig);
        p.implicit_nat = true;
        Ok(p.term(s)?)
    }

    pub fn parse_term(&self, src: &str) -> LResult<Term> {
        self.term(&sexp::read_one(src)?)
    }

    pub fn parse_formula(&self, src: &str) -> LResult<Formula> {
        self.formula(&sexp::read_one(src)?)
    }

    pub fn parse_proof(&self, src: &str) -> LResult<Proof> {
        self.proof(&sexp::read_one(src)?)
    }

    fn binder(&self, s: &Sexp) -> LResult<Name> {
        let x = s.atom().filter(|a| is_name(a)).ok_or_else(|| syn(s, "variable expected"))?;
        if self.sig.contains(x) {
            return Err(syn(s, format!("`{x}` is a constant and cannot be bound")));
        }
        Ok(x.into())
    }

    pub fn formula(&self, s: &Sexp) -> LResult<Formula> {
        let xs = s.list().ok_or_else(|| syn(s, "formula expected"))?;
        let kw = s.head().ok_or_else(|| syn(s, "formula expected"))?;
        let args = &xs[1..];
        let two = |f: fn(Formula, Formula) -> Formula| -> LResult<Formula> {
            match args {
                [a, b] => Ok(f(self.formula(a)?, self.formula(b)?)),
                _ => Err(syn(s, format!("`{kw}` takes two formulas"))),
            }
        };
        match kw {
            "atom" => match args {
                [] => Err(syn(s, "empty atom")),
                [t] => Ok(Formula::Atom(self.term(t)?)),
                _ => {
                    let f = self.term(&args[0])?;
                    let rest = args[1..].iter().map(|a| self.term(a)).collect::<LResult<Vec<_>>>()?;
                    Ok(Formula::Atom(Term::apps(f, rest)))
                }
            },
            "and" => two(Formula::and),
            "or" => two(Formula::or),
            "imp" => two(Formula::implies),
            "all" | "ex" => match args {
                [x, a] => {
                    let x = self.binder(x)?;
                    let a = Box::new(self.formula(a)?);
                    Ok(if kw == "all" { Formula::Forall(x, a) } else { Formula::Exists(x, a) })
                }
                _ => Err(syn(s, format!("`{kw}` takes a variable and a formula"))),
            },
            name => {
                let m = self
                    .macros
                    .get(name)
                    .ok_or_else(|| LogicError::Unknown { kind: "formula", name: name.to_string() })?;
                if m.params.len() != args.len() {
                    return Err(syn(s, format!("`{name}` takes {} arguments", m.params.len())));
                }
                let ts = args.iter().map(|a| self.term(a)).collect::<LResult<Vec<_>>>()?;
                Ok(instantiate_macro(m, &ts))
            }
        }
    }

    pub fn proof(&self, s: &Sexp) -> LResult<Proof> {
        let xs = s.list().ok_or_else(|| syn(s, "proof expected"))?;
        let kw = s.head().ok_or_else(|| syn(s, "proof expected"))?;
        if !PROOF_KEYWORDS.contains(&kw) {
            return Err(syn(s, format!("unknown proof rule `{kw}`")));
        }
        let a = &xs[1..];
        let bad = || syn(s, format!("malformed `{kw}`"));
        let label = |x: &Sexp| -> LResult<Name> {
            x.atom().filter(|n| is_name(n)).map(Name::from).ok_or_else(|| syn(x, "label expected"))
        };
        let bx = |p: &Sexp| -> LResult<Box<Proof>> { Ok(Box::new(self.proof(p)?)) };
        Ok(match (kw, a) {
            ("hyp", [x]) => Proof::Hyp(label(x)?, None),
            ("hyp", [x, f]) => Proof::Hyp(label(x)?, Some(self.formula(f)?)),
            ("and-i", [p, q]) => Proof::AndI(bx(p)?, bx(q)?),
            ("and-e0", [p]) => Proof::AndE(0, bx(p)?),
            ("and-e1", [p]) => Proof::AndE(1, bx(p)?),
            ("imp-i", [x, f, p]) => Proof::ImpI(label(x)?, self.formula(f)?, bx(p)?),
            ("imp-e", [p, q]) => Proof::ImpE(bx(p)?, bx(q)?),
            ("or-i0", [f, p]) => Proof::OrI(0, self.formula(f)?, bx(p)?),
            ("or-i1", [f, p]) => Proof::OrI(1, self.formula(f)?, bx(p)?),
            ("or-e", [p, l, r]) => {
                let (Some([x, p1]), Some([y, p2])) = (l.list(), r.list()) else {
                    return Err(bad());
                };
                Proof::OrE(bx(p)?, label(x)?, bx(p1)?, label(y)?, bx(p2)?)
            }
            ("all-i", [x, p]) => Proof::ForallI(self.binder(x)?, bx(p)?),
            ("all-e", [p, t]) => Proof::ForallE(bx(p)?, self.term(t)?),
            ("ex-i", [f, t, p]) => Proof::ExistsI(self.formula(f)?, self.term(t)?, bx(p)?),
            ("ex-e", [p, body]) => {
                let Some([al, x, q]) = body.list() else {
                    return Err(bad());
                };
                Proof::ExistsE(bx(p)?, self.binder(al)?, label(x)?, bx(q)?)
            }
            ("ind", [f, p0, ps]) => Proof::Induction(self.formula(f)?, bx(p0)?, bx(ps)?),
            ("post", [r, c, ps @ ..]) => {
                let r = r.atom().ok_or_else(bad)?;
                let ps = ps.iter().map(|p| self.proof(p)).collect::<LResult<Vec<_>>>()?;
                Proof::Post(r.into(), self.formula(c)?, ps)
            }
            ("ax", [c]) => Proof::AtomicAxiom(self.formula(c)?),
            ("em1", [p]) => Proof::Em1(p.atom().ok_or_else(bad)?.into()),
            ("chi-ax", [p, ts, t]) => {
                let ts = ts.list().ok_or_else(bad)?.iter().map(|x| self.term(x)).collect::<LResult<_>>()?;
                Proof::ChiAxiom(p.atom().ok_or_else(bad)?.into(), ts, self.term(t)?)
            }
            ("phi-ax", [p, ts]) => {
                let ts = ts.list().ok_or_else(bad)?.iter().map(|x| self.term(x)).collect::<LResult<_>>()?;
                Proof::PhiAxiom(p.atom().ok_or_else(bad)?.into(), ts)
            }
            ("use", [n]) => {
                let n = n.atom().ok_or_else(bad)?;
                self.theorem(n)
                    .map(|l| l.proof.clone())
                    .ok_or_else(|| LogicError::Unknown { kind: "lemma", name: n.to_string() })?
            }
            _ => return Err(bad()),
        })
    }

    /// Parses a type, for declarations of free variables.
    pub fn parse_type(&self, src: &str) -> LResult<Type> {
        Ok(type_from_sexp(&sexp::read_one(src)?)?)
    }
}

fn instantiate_macro(m: &Macro, ts: &[Term]) -> Formula {
    // Rename parameters apart first so that simultaneous substitution is
    // unaffected by argument variables that share a parameter's name.
    let mut f = m.body.clone();
    let tmps: Vec<Name> = m.params.iter().map(|p| crate::kernel::fresh_name(p)).collect();
    for (p, tmp) in m.params.iter().zip(&tmps) {
        f = f.subst(p, &Term::Var(tmp.clone(), Type::Nat));
    }
    for (tmp, t) in tmps.iter().zip(ts) {
        f = f.subst(tmp, t);
    }
    f
}
