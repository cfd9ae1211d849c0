use crate::kernel::{fresh_name, KResult, KernelError, Signature, Term, Type, CUP};
use crate::logic::Formula;

/// `|A|`, the type of realizers of `A`.
pub fn realizer_type(a: &Formula) -> Type {
    match a {
        Formula::Atom(_) => Type::State,
        Formula::And(a, b) => Type::product(realizer_type(a), realizer_type(b)),
        Formula::Or(a, b) => Type::product(Type::Bool, Type::product(realizer_type(a), realizer_type(b))),
        Formula::Implies(a, b) => Type::arrow(realizer_type(a), realizer_type(b)),
        Formula::Forall(_, a) => Type::arrow(Type::Nat, realizer_type(a)),
        Formula::Exists(_, a) => Type::product(Type::Nat, realizer_type(a)),
    }
}

/// `p0 t = π0 t`, the boolean of a disjunction realizer.
pub fn p0(t: Term) -> Term {
    Term::proj(0, t)
}

/// `p1 t = π0 (π1 t)`, the left realizer.
pub fn p1(t: Term) -> Term {
    Term::proj(0, Term::proj(1, t))
}

/// `p2 t = π1 (π1 t)`, the right realizer.
pub fn p2(t: Term) -> Term {
    Term::proj(1, Term::proj(1, t))
}

pub fn cup(sig: &Signature, a: Term, b: Term) -> KResult<Term> {
    Ok(Term::apps(sig.const_term(CUP)?, [a, b]))
}

/// `u1 ⋓ ... ⋓ un`, or `∅` for no terms.
pub fn cup_all(sig: &Signature, ts: Vec<Term>) -> KResult<Term> {
    let mut it = ts.into_iter();
    let Some(first) = it.next() else {
        return Ok(Term::empty_state());
    };
    it.try_fold(first, |acc, t| cup(sig, acc, t))
}

fn pred_arity(sig: &Signature, pred: &str) -> KResult<usize> {
    Ok(sig.predicate(pred).ok_or_else(|| KernelError::NotAPredicate(pred.into()))?.arity)
}

fn params(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("x{i}")).collect()
}

/// `∀x⃗. (∃y P(x⃗, y)) ∨ (∀y ¬P(x⃗, y))`
pub fn em1_formula(sig: &Signature, pred: &str) -> KResult<Formula> {
    let k = pred_arity(sig, pred)?;
    let xs = params(k);
    let y = Term::var("y", Type::Nat);
    let mut args: Vec<Term> = xs.iter().map(|x| Term::var(x, Type::Nat)).collect();
    args.push(y);
    let p = Term::apps(sig.const_term(pred)?, args);
    let not_p = Term::app(sig.const_term("not")?, p.clone());
    let mut f = Formula::or(
        Formula::exists("y", Formula::Atom(p)),
        Formula::forall("y", Formula::Atom(not_p)),
    );
    for x in xs.iter().rev() {
        f = Formula::forall(x, f);
    }
    Ok(f)
}

/// `E_P = λx⃗. ⟨Χ_P x⃗, ⟨⟨Φ_P x⃗, ∅⟩, λn. Add_P x⃗ n⟩⟩`
pub fn em1_realizer(sig: &Signature, pred: &str) -> KResult<Term> {
    let k = pred_arity(sig, pred)?;
    let xs: Vec<_> = (0..k).map(|_| fresh_name("x")).collect();
    let args: Vec<Term> = xs.iter().map(|x| Term::Var(x.clone(), Type::Nat)).collect();
    let n = fresh_name("n");
    let chi = Term::apps(sig.const_term(&format!("Chi.{pred}"))?, args.clone());
    let phi = Term::apps(sig.const_term(&format!("Phi.{pred}"))?, args.clone());
    let mut add_args = args;
    add_args.push(Term::Var(n.clone(), Type::Nat));
    let add = Term::apps(sig.const_term(&format!("Add.{pred}"))?, add_args);
    let mut t = Term::pair(
        chi,
        Term::pair(Term::pair(phi, Term::empty_state()), Term::lam_n(n, Type::Nat, add)),
    );
    for x in xs.into_iter().rev() {
        t = Term::lam_n(x, Type::Nat, t);
    }
    Ok(t)
}

/// `P(t⃗, t) ⇒ Χ_P t⃗` as an atomic formula.
pub fn chi_axiom_formula(sig: &Signature, pred: &str, ts: &[Term], t: &Term) -> KResult<Formula> {
    if ts.len() != pred_arity(sig, pred)? {
        return Err(KernelError::MalformedApplication(format!("{pred} applied to {} parameters", ts.len())));
    }
    let mut all = ts.to_vec();
    all.push(t.clone());
    let p = Term::apps(sig.const_term(pred)?, all);
    let chi = Term::apps(sig.const_term(&format!("Chi.{pred}"))?, ts.iter().cloned());
    Ok(Formula::Atom(Term::apps(sig.const_term("imp")?, [p, chi])))
}

/// `Χ_P t⃗ ⇒ P(t⃗, Φ_P t⃗)` as an atomic formula.
pub fn phi_axiom_formula(sig: &Signature, pred: &str, ts: &[Term]) -> KResult<Formula> {
    if ts.len() != pred_arity(sig, pred)? {
        return Err(KernelError::MalformedApplication(format!("{pred} applied to {} parameters", ts.len())));
    }
    let chi = Term::apps(sig.const_term(&format!("Chi.{pred}"))?, ts.iter().cloned());
    let phi = Term::apps(sig.const_term(&format!("Phi.{pred}"))?, ts.iter().cloned());
    let mut all = ts.to_vec();
    all.push(phi);
    let p = Term::apps(sig.const_term(pred)?, all);
    Ok(Formula::Atom(Term::apps(sig.const_term("imp")?, [chi, p])))
}

/// Realizer of the χ-axiom: `Add_P t⃗ t`.
pub fn chi_axiom_realizer(sig: &Signature, pred: &str, ts: &[Term], t: &Term) -> KResult<Term> {
    let mut all = ts.to_vec();
    all.push(t.clone());
    Ok(Term::apps(sig.const_term(&format!("Add.{pred}"))?, all))
}
