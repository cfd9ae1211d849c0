use std::collections::BTreeSet;
use std::fmt;

use crate::kernel::{
    canonical, fresh_name, normalize, print_term_with, subst as term_subst, ConstKind, KResult, Name,
    PrintOpts, Signature, Term, Type,
};

/// Formulas of first-order arithmetic over decidable atoms. An atom is any
/// term of type `Bool`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Atom(Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Name, Box<Formula>),
    Exists(Name, Box<Formula>),
}

impl Formula {
    pub fn atom(t: Term) -> Formula {
        Formula::Atom(t)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, a: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(a))
    }

    pub fn exists(x: &str, a: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    pub fn as_atom(&self) -> Option<&Term> {
        match self {
            Formula::Atom(t) => Some(t),
            _ => None,
        }
    }

    /// No `→` anywhere.
    pub fn is_implication_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_implication_free() && b.is_implication_free(),
            Formula::Implies(..) => false,
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.is_implication_free(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Formula::Atom(t) => t.free_vars(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let mut s = a.free_vars();
                s.remove(x);
                s
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Formula::Atom(t) => t.has_free(x),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.has_free(x) || b.has_free(x),
            Formula::Forall(y, a) | Formula::Exists(y, a) => &**y != x && a.has_free(x),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding `A[t/x]` for an individual variable `x`.
    pub fn subst(&self, x: &str, t: &Term) -> Formula {
        if !self.has_free(x) {
            return self.clone();
        }
        let fv = t.free_vars();
        self.subst_in(x, t, &fv)
    }

    fn subst_in(&self, x: &str, t: &Term, fv: &BTreeSet<Name>) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(term_subst(a, x, t)),
            Formula::And(a, b) => Formula::and(a.subst_in(x, t, fv), b.subst_in(x, t, fv)),
            Formula::Or(a, b) => Formula::or(a.subst_in(x, t, fv), b.subst_in(x, t, fv)),
            Formula::Implies(a, b) => Formula::implies(a.subst_in(x, t, fv), b.subst_in(x, t, fv)),
            Formula::Forall(y, a) | Formula::Exists(y, a) => {
                let rebuild = |y: Name, a: Formula| match self {
                    Formula::Forall(..) => Formula::Forall(y, Box::new(a)),
                    _ => Formula::Exists(y, Box::new(a)),
                };
                if &**y == x || !a.has_free(x) {
                    self.clone()
                } else if fv.contains(y) {
                    let y2 = fresh_name(y);
                    let a2 = a.subst(y, &Term::Var(y2.clone(), Type::Nat));
                    rebuild(y2, a2.subst_in(x, t, fv))
                } else {
                    rebuild(y.clone(), a.subst_in(x, t, fv))
                }
            }
        }
    }

    /// Instance at a numeral of the body of a leading quantifier.
    pub fn instantiate(&self, n: u64) -> Option<Formula> {
        match self {
            Formula::Forall(x, a) | Formula::Exists(x, a) => Some(a.subst(x, &Term::num(n))),
            _ => None,
        }
    }

    /// Number of connectives and quantifiers.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.depth(),
        }
    }

    pub fn atoms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Formula::Atom(t) => out.push(t),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.collect_atoms(out),
        }
    }

    /// Rewrites every atomic body.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom(t) => Formula::Atom(f(t)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(a.map_atoms(f))),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(a.map_atoms(f))),
        }
    }

    /// Canonical representative for comparison: bound variables renamed by
    /// depth, predicates unfolded and atoms normalized.
    pub fn canonical(&self, sig: &Signature) -> KResult<Formula> {
        let mut scope = Vec::new();
        self.canon(sig, &mut scope)
    }

    fn canon(&self, sig: &Signature, scope: &mut Vec<(Name, Name)>) -> KResult<Formula> {
        Ok(match self {
            Formula::Atom(t) => {
                let mut renamed = t.clone();
                // Innermost binders win, so substitute from the outside in
                // using fresh canonical names that cannot clash.
                for (old, new) in scope.iter() {
                    renamed = term_subst(&renamed, old, &Term::Var(new.clone(), Type::Nat));
                }
                Formula::Atom(normal_atom(sig, &renamed)?)
            }
            Formula::And(a, b) => Formula::and(a.canon(sig, scope)?, b.canon(sig, scope)?),
            Formula::Or(a, b) => Formula::or(a.canon(sig, scope)?, b.canon(sig, scope)?),
            Formula::Implies(a, b) => Formula::implies(a.canon(sig, scope)?, b.canon(sig, scope)?),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let new: Name = format!("#{}", scope.len()).into();
                // Shadowing: drop earlier bindings of the same name.
                let saved: Vec<(Name, Name)> = scope.clone();
                scope.retain(|(o, _)| o != x);
                scope.push((x.clone(), new.clone()));
                let body = a.canon(sig, scope);
                *scope = saved;
                let body = Box::new(body?);
                match self {
                    Formula::Forall(..) => Formula::Forall(new, body),
                    _ => Formula::Exists(new, body),
                }
            }
        })
    }

    /// Equality up to bound renaming, predicate unfolding and normalization
    /// of atoms.
    pub fn equiv(&self, other: &Formula, sig: &Signature) -> KResult<bool> {
        if self == other {
            return Ok(true);
        }
        Ok(self.canonical(sig)? == other.canonical(sig)?)
    }
}

/// Replaces unfoldable predicate constants by their bodies.
pub fn unfold(sig: &Signature, t: &Term) -> Term {
    t.rewrite(&mut |u| match u {
        Term::Const(c, _) => match sig.get(c) {
            Some(d) if d.unfold => match &d.kind {
                ConstKind::Defined(body) => Some(unfold(sig, body)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    })
}

/// Normal form of an atomic body after unfolding, with canonical binders.
pub fn normal_atom(sig: &Signature, t: &Term) -> KResult<Term> {
    Ok(canonical(&normalize(sig, &unfold(sig, t))?))
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    emit(f, &mut out);
    out
}

fn emit(f: &Formula, out: &mut String) {
    let opts = PrintOpts { bare_free: true };
    match f {
        Formula::Atom(t) => {
            out.push_str("(atom ");
            out.push_str(&print_term_with(t, opts, &[]));
            out.push(')');
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let k = match f {
                Formula::And(..) => "and",
                Formula::Or(..) => "or",
                _ => "imp",
            };
            out.push('(');
            out.push_str(k);
            out.push(' ');
            emit(a, out);
            out.push(' ');
            emit(b, out);
            out.push(')');
        }
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let k = if matches!(f, Formula::Forall(..)) { "all" } else { "ex" };
            out.push('(');
            out.push_str(k);
            out.push(' ');
            out.push_str(x);
            out.push(' ');
            emit(a, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term;

    fn at(sig: &Signature, s: &str) -> Formula {
        let mut p = crate::kernel::TermParser::new(sig);
        p.implicit_nat = true;
        Formula::Atom(p.term(&crate::sexp::read_one(s).unwrap()).unwrap())
    }

    #[test]
    fn substitution_renames_binders() {
        let sig = Signature::prelude();
        let f = Formula::forall("y", at(&sig, "(lt x y)"));
        let g = f.subst("x", &Term::var("y", Type::Nat));
        match &g {
            Formula::Forall(z, _) => assert_ne!(&**z, "y"),
            _ => panic!(),
        }
        assert!(g.has_free("y"));
    }

    #[test]
    fn equivalence_modulo_binders_and_unfolding() {
        let mut sig = Signature::prelude();
        let body = parse_term(&sig, "(lam (y Nat) (x Nat) (lt x y))").unwrap();
        sig.add_predicate("P", 1, body).unwrap();
        let a = Formula::exists("a", at(&sig, "(P 3 a)"));
        let b = Formula::exists("b", at(&sig, "(lt b 3)"));
        assert!(a.equiv(&b, &sig).unwrap());
        let c = Formula::exists("b", at(&sig, "(lt b 4)"));
        assert!(!a.equiv(&c, &sig).unwrap());
        // arithmetic on closed subterms is evaluated
        let d = Formula::exists("b", at(&sig, "(lt b (plus 1 2))"));
        assert!(a.equiv(&d, &sig).unwrap());
    }
}
