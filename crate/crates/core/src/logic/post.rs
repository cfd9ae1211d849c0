use std::collections::BTreeMap;

use crate::kernel::{typecheck, Ctx, KResult, KernelError, Signature, Term, Type};
use crate::sexp::{self, Sexp};

use super::formula::normal_atom;
use super::taut::{is_tautological_consequence, TautError};

/// Pattern over normalized atomic bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pat {
    Meta(String),
    Num(u64),
    Succ(Box<Pat>),
    App(String, Vec<Pat>),
}

impl Pat {
    pub fn parse(src: &str) -> Result<Pat, sexp::SexpError> {
        Pat::from_sexp(&sexp::read_one(src)?)
    }

    fn from_sexp(s: &Sexp) -> Result<Pat, sexp::SexpError> {
        match s {
            Sexp::Atom(a, _) => {
                if let Some(m) = a.strip_prefix('?') {
                    Ok(Pat::Meta(m.to_string()))
                } else if let Ok(n) = a.parse() {
                    Ok(Pat::Num(n))
                } else {
                    Ok(Pat::App(a.clone(), Vec::new()))
                }
            }
            Sexp::List(xs, _) if !xs.is_empty() => {
                let head = xs[0].atom().ok_or_else(|| s.err("pattern head must be a symbol"))?;
                let args = xs[1..].iter().map(Pat::from_sexp).collect::<Result<Vec<_>, _>>()?;
                if head == "S" && args.len() == 1 {
                    Ok(Pat::Succ(Box::new(args.into_iter().next().expect("one arg"))))
                } else {
                    Ok(Pat::App(head.to_string(), args))
                }
            }
            _ => Err(s.err("malformed pattern")),
        }
    }

    fn matches(&self, t: &Term, b: &mut BTreeMap<String, Term>) -> bool {
        match self {
            Pat::Meta(m) => match b.get(m) {
                Some(u) => u == t,
                None => {
                    b.insert(m.clone(), t.clone());
                    true
                }
            },
            Pat::Num(n) => t.as_num() == Some(*n),
            Pat::Succ(p) => match t {
                Term::Succ(u) => p.matches(u, b),
                _ => false,
            },
            Pat::App(c, ps) => {
                let (head, args) = t.spine();
                matches!(head, Term::Const(d, _) if **d == **c)
                    && args.len() == ps.len()
                    && ps.iter().zip(args).all(|(p, a)| p.matches(a, b))
            }
        }
    }

    /// Builds the term with metavariables replaced by `b`.
    pub fn build(&self, sig: &Signature, b: &BTreeMap<String, Term>) -> KResult<Term> {
        Ok(match self {
            Pat::Meta(m) => b
                .get(m)
                .cloned()
                .ok_or_else(|| KernelError::UnboundVariable(m.as_str().into()))?,
            Pat::Num(n) => Term::num(*n),
            Pat::Succ(p) => Term::succ(p.build(sig, b)?),
            Pat::App(c, ps) => {
                let f = sig.const_term(c)?;
                let args = ps.iter().map(|p| p.build(sig, b)).collect::<KResult<Vec<_>>>()?;
                Term::apps(f, args)
            }
        })
    }

    pub fn metas(&self, out: &mut Vec<String>) {
        match self {
            Pat::Meta(m) => {
                if !out.contains(m) {
                    out.push(m.clone())
                }
            }
            Pat::Num(_) => {}
            Pat::Succ(p) => p.metas(out),
            Pat::App(_, ps) => ps.iter().for_each(|p| p.metas(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PostKind {
    /// Premises and conclusion are matched against patterns.
    Pattern { premises: Vec<Pat>, conclusion: Pat },
    /// `eq a b, Q ⊢ Q` with occurrences of `a` replaced by `b`.
    EqSubst,
    /// Any tautological consequence of the premises.
    Taut,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostRule {
    pub name: String,
    pub kind: PostKind,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PostError {
    #[error("unknown Post rule `{0}`")]
    Unknown(String),
    #[error("Post rule `{rule}` does not apply: {msg}")]
    Mismatch { rule: String, msg: String },
    #[error(transparent)]
    Taut(#[from] TautError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("rule `{0}` is not a tautological consequence of its premises")]
    Unsound(String),
}

const BUILTIN: &[(&str, &[&str], &str)] = &[
    ("eq-sym", &["(eq ?a ?b)"], "(eq ?b ?a)"),
    ("eq-trans", &["(eq ?a ?b)", "(eq ?b ?c)"], "(eq ?a ?c)"),
    ("le-trans", &["(le ?a ?b)", "(le ?b ?c)"], "(le ?a ?c)"),
    ("lt-le", &["(lt ?a ?b)"], "(le ?a ?b)"),
    ("lt-le-trans", &["(lt ?a ?b)", "(le ?b ?c)"], "(lt ?a ?c)"),
    ("le-zero-eq", &["(le ?a 0)"], "(eq ?a 0)"),
    ("lt-le-pred", &["(lt ?a ?b)", "(le ?b (S ?c))"], "(le ?a ?c)"),
    ("le-zero-min", &["(le ?a 0)"], "(not (lt ?b ?a))"),
    ("notlt-le", &["(not (lt ?b ?c))", "(le ?a ?c)"], "(le ?a ?b)"),
];

/// The named Post rules available to proofs.
#[derive(Clone, Debug)]
pub struct PostTable {
    rules: BTreeMap<String, PostRule>,
}

impl Default for PostTable {
    fn default() -> Self {
        let mut rules = BTreeMap::new();
        for (name, ps, c) in BUILTIN {
            let premises = ps.iter().map(|p| Pat::parse(p).expect("builtin pattern")).collect();
            let conclusion = Pat::parse(c).expect("builtin pattern");
            rules.insert(
                name.to_string(),
                PostRule { name: name.to_string(), kind: PostKind::Pattern { premises, conclusion } },
            );
        }
        for (name, kind) in [("eq-subst", PostKind::EqSubst), ("taut", PostKind::Taut)] {
            rules.insert(name.to_string(), PostRule { name: name.to_string(), kind });
        }
        PostTable { rules }
    }
}

fn replace(t: &Term, a: &Term, b: &Term) -> Term {
    t.rewrite(&mut |u| (u == a).then(|| b.clone()))
}

impl PostTable {
    pub fn get(&self, name: &str) -> Option<&PostRule> {
        self.rules.get(name)
    }

    pub fn rules(&self) -> impl Iterator<Item = &PostRule> {
        self.rules.values()
    }

    /// Adds a user rule. It is accepted only when the conclusion is a
    /// tautological consequence of the premises, with every
    /// non-connective subterm read as an opaque atom.
    pub fn register(&mut self, sig: &Signature, name: &str, premises: Vec<Pat>, conclusion: Pat) -> Result<(), PostError> {
        let mut metas = Vec::new();
        premises.iter().for_each(|p| p.metas(&mut metas));
        conclusion.metas(&mut metas);
        let b: BTreeMap<String, Term> =
            metas.iter().map(|m| (m.clone(), Term::var(&format!("?{m}"), Type::Nat))).collect();
        let ps = premises.iter().map(|p| p.build(sig, &b)).collect::<KResult<Vec<_>>>()?;
        let c = conclusion.build(sig, &b)?;
        let mut ctx = Ctx::new();
        for m in &metas {
            ctx.push(format!("?{m}").into(), Type::Nat);
        }
        for t in ps.iter().chain(std::iter::once(&c)) {
            let ty = typecheck(t, &ctx, sig)?;
            if ty != Type::Bool {
                return Err(KernelError::TypeMismatch { expected: Type::Bool, found: ty, context: format!("rule `{name}`") }.into());
            }
        }
        if !is_tautological_consequence(&ps, &c)? {
            return Err(PostError::Unsound(name.to_string()));
        }
        self.rules.insert(
            name.to_string(),
            PostRule { name: name.to_string(), kind: PostKind::Pattern { premises, conclusion } },
        );
        Ok(())
    }

    /// Checks one application of a rule to atomic bodies.
    pub fn check(&self, sig: &Signature, rule: &str, premises: &[Term], conclusion: &Term) -> Result<(), PostError> {
        let r = self.get(rule).ok_or_else(|| PostError::Unknown(rule.to_string()))?;
        let ps = premises.iter().map(|p| normal_atom(sig, p)).collect::<KResult<Vec<_>>>()?;
        let c = normal_atom(sig, conclusion)?;
        let mismatch = |msg: &str| PostError::Mismatch { rule: rule.to_string(), msg: msg.to_string() };
        match &r.kind {
            PostKind::Pattern { premises: pats, conclusion: cpat } => {
                if pats.len() != ps.len() {
                    return Err(mismatch(&format!("expects {} premises, got {}", pats.len(), ps.len())));
                }
                let mut b = BTreeMap::new();
                for (i, (p, t)) in pats.iter().zip(&ps).enumerate() {
                    if !p.matches(t, &mut b) {
                        return Err(mismatch(&format!("premise {i} does not match")));
                    }
                }
                if !cpat.matches(&c, &mut b) {
                    return Err(mismatch("conclusion does not match"));
                }
                Ok(())
            }
            PostKind::EqSubst => {
                let [eq, q] = ps.as_slice() else {
                    return Err(mismatch("expects two premises"));
                };
                let (head, args) = eq.spine();
                let is_eq = matches!(head, Term::Const(c, _) if &**c == "eq") && args.len() == 2;
                if !is_eq {
                    return Err(mismatch("first premise must be an equation"));
                }
                let replaced = normal_atom(sig, &replace(q, args[0], args[1]))?;
                if replaced == c {
                    Ok(())
                } else {
                    Err(mismatch("conclusion is not the premise rewritten by the equation"))
                }
            }
            PostKind::Taut => {
                if is_tautological_consequence(&ps, &c)? {
                    Ok(())
                } else {
                    Err(mismatch("conclusion is not a tautological consequence"))
                }
            }
        }
    }
}

const SCHEMAS: &[&str] = &["(eq ?a ?a)", "(le ?a ?a)", "(le 0 ?a)", "(not (lt ?a 0))", "(le ?a (S ?a))", "(lt ?a (S ?a))"];

/// Whether an atomic formula may be used as an axiom: it normalizes to
/// `true`, is an instance of an identity schema, or is a tautology.
pub fn is_atomic_axiom(sig: &Signature, t: &Term) -> Result<bool, PostError> {
    let n = normal_atom(sig, t)?;
    if n == Term::True {
        return Ok(true);
    }
    for s in SCHEMAS {
        let p = Pat::parse(s).expect("schema pattern");
        if p.matches(&n, &mut BTreeMap::new()) {
            return Ok(true);
        }
    }
    Ok(is_tautological_consequence(&[], &n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{normalize, parse_term_in};

    fn t(sig: &Signature, s: &str) -> Term {
        let ctx = [("a", Type::Nat), ("b", Type::Nat), ("c", Type::Nat), ("n", Type::Nat)];
        parse_term_in(sig, &ctx, s).unwrap()
    }

    #[test]
    fn pattern_rules() {
        let sig = Signature::prelude();
        let tab = PostTable::default();
        tab.check(&sig, "lt-le-pred", &[t(&sig, "(lt a b)"), t(&sig, "(le b (S n))")], &t(&sig, "(le a n)"))
            .unwrap();
        assert!(tab
            .check(&sig, "lt-le-pred", &[t(&sig, "(lt a b)"), t(&sig, "(le b n)")], &t(&sig, "(le a n)"))
            .is_err());
        tab.check(&sig, "le-zero-min", &[t(&sig, "(le a 0)")], &t(&sig, "(not (lt b a))")).unwrap();
        tab.check(&sig, "eq-subst", &[t(&sig, "(eq a 3)"), t(&sig, "(lt a b)")], &t(&sig, "(lt 3 b)")).unwrap();
        tab.check(&sig, "taut", &[t(&sig, "(lt a b)")], &t(&sig, "(or (lt a b) (eq a c))")).unwrap();
        assert!(matches!(tab.check(&sig, "nope", &[], &Term::True), Err(PostError::Unknown(_))));
    }

    #[test]
    fn user_rules_must_be_tautological() {
        let sig = Signature::prelude();
        let mut tab = PostTable::default();
        let ok = tab.register(
            &sig,
            "and-left",
            vec![Pat::parse("(and ?p ?q)").unwrap()],
            Pat::parse("?p").unwrap(),
        );
        assert!(ok.is_err(), "metavariables of type Nat cannot be booleans");
        tab.register(
            &sig,
            "weaken",
            vec![Pat::parse("(lt ?a ?b)").unwrap()],
            Pat::parse("(or (lt ?a ?b) (eq ?a ?b))").unwrap(),
        )
        .unwrap();
        assert!(matches!(
            tab.register(&sig, "bogus", vec![Pat::parse("(lt ?a ?b)").unwrap()], Pat::parse("(lt ?b ?a)").unwrap()),
            Err(PostError::Unsound(_))
        ));
    }

    #[test]
    fn axioms() {
        let sig = Signature::prelude();
        assert!(is_atomic_axiom(&sig, &t(&sig, "(le a a)")).unwrap());
        assert!(is_atomic_axiom(&sig, &t(&sig, "(lt 2 3)")).unwrap());
        assert!(is_atomic_axiom(&sig, &t(&sig, "(or (lt a b) (not (lt a b)))")).unwrap());
        assert!(!is_atomic_axiom(&sig, &t(&sig, "(lt a b)")).unwrap());
        assert_eq!(normalize(&sig, &t(&sig, "(le 4 3)")).unwrap(), Term::False);
    }
}
