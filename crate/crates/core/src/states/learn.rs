use crate::kernel::{KResult, KernelError, Machine, Signature, Term, Type, CUP, DEFAULT_FUEL};

use super::KnowledgeState;

/// Which learning constant an application uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnOp {
    Chi,
    Phi,
    Add,
    Cup,
}

fn classify(sig: &Signature, name: &str) -> Option<(LearnOp, usize)> {
    if name == CUP {
        return Some((LearnOp::Cup, 2));
    }
    let (prefix, pred) = name.split_once('.')?;
    let k = sig.predicate(pred)?.arity;
    match prefix {
        "chi" => Some((LearnOp::Chi, k + 1)),
        "phi" => Some((LearnOp::Phi, k + 1)),
        "add" => Some((LearnOp::Add, k + 2)),
        _ => None,
    }
}

/// Performs one learning-rule contraction on `chi.P s n⃗`, `phi.P s n⃗`,
/// `add.P s n⃗ m` or `cup s1 s2` with closed normal arguments.
pub fn learn_rule_step(sig: &Signature, applied: &Term) -> KResult<Term> {
    let (head, args) = applied.spine();
    let Term::Const(name, _) = head else {
        return Err(KernelError::MalformedApplication(format!("head of {applied} is not a learning constant")));
    };
    let (op, arity) = classify(sig, name).ok_or_else(|| {
        KernelError::MalformedApplication(format!("`{name}` is not a learning constant"))
    })?;
    if args.len() != arity {
        return Err(KernelError::MalformedApplication(format!(
            "`{name}` expects {arity} arguments, got {}",
            args.len()
        )));
    }
    let want_state = |i: usize| op == LearnOp::Cup || i == 0;
    for (i, a) in args.iter().enumerate() {
        let ok = if want_state(i) { a.as_state().is_some() } else { a.as_num().is_some() };
        if !ok {
            return Err(KernelError::MalformedApplication(format!(
                "argument {i} of `{name}` must be a {}",
                if want_state(i) { "state literal" } else { "numeral" }
            )));
        }
    }
    let vals: Vec<Term> = args.into_iter().cloned().collect();
    Machine::new(sig, DEFAULT_FUEL).apply_const(name, &vals)
}

/// `chi_P s n⃗`
pub fn chi(s: &KnowledgeState, pred: &str, args: &[u64]) -> bool {
    s.lookup(pred, args).is_some()
}

/// `phi_P s n⃗`, zero when undecided.
pub fn phi(s: &KnowledgeState, pred: &str, args: &[u64]) -> u64 {
    s.lookup(pred, args).unwrap_or(0)
}

/// `add_P s n⃗ m`: the singleton `{P(n⃗, m)}` when `P(n⃗, m)` holds and `s`
/// has no witness for `n⃗` yet, otherwise the empty state.
pub fn add(sig: &Signature, s: &KnowledgeState, pred: &str, args: &[u64], m: u64) -> KResult<KnowledgeState> {
    let mut vals = vec![Term::StateConst(s.clone())];
    vals.extend(args.iter().map(|n| Term::num(*n)));
    vals.push(Term::num(m));
    let r = Machine::new(sig, DEFAULT_FUEL).apply_const(&format!("add.{pred}"), &vals)?;
    r.as_state()
        .cloned()
        .ok_or_else(|| KernelError::MalformedApplication("add did not return a state".into()))
}

/// Type of the learning constant for `P` of the given kind.
pub fn learn_type(sig: &Signature, op: LearnOp, pred: &str) -> KResult<Type> {
    let name = match op {
        LearnOp::Chi => format!("chi.{pred}"),
        LearnOp::Phi => format!("phi.{pred}"),
        LearnOp::Add => format!("add.{pred}"),
        LearnOp::Cup => CUP.to_string(),
    };
    Ok(sig.get(&name).ok_or(KernelError::UnknownConstant(name.into()))?.ty.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term;

    fn sig() -> Signature {
        let mut s = Signature::prelude();
        let body = parse_term(&s, "(lam (x Nat) (y Nat) (eq x (times y y)))").unwrap();
        s.add_predicate("P", 1, body).unwrap();
        s
    }

    #[test]
    fn add_respects_truth_and_consistency() {
        let s = sig();
        let e = KnowledgeState::empty();
        let one = add(&s, &e, "P", &[9], 3).unwrap();
        assert_eq!(one.to_string(), "{(P 9 3)}");
        assert!(add(&s, &e, "P", &[9], 2).unwrap().is_empty());
        assert!(add(&s, &one, "P", &[9], 3).unwrap().is_empty());
        assert!(chi(&one, "P", &[9]) && !chi(&one, "P", &[4]));
        assert_eq!(phi(&one, "P", &[9]), 3);
    }

    #[test]
    fn learn_rule_step_checks_shape() {
        let s = sig();
        let ok = parse_term(&s, "(chi.P {(P 4 2)} 4)").unwrap();
        assert_eq!(learn_rule_step(&s, &ok).unwrap(), Term::True);
        let bad = parse_term(&s, "(chi.P {(P 4 2)})").unwrap();
        assert!(matches!(learn_rule_step(&s, &bad), Err(KernelError::MalformedApplication(_))));
        let bad = parse_term(&s, "(add.P {} 4 (plus 1 1))").unwrap();
        assert!(matches!(learn_rule_step(&s, &bad), Err(KernelError::MalformedApplication(_))));
        let bad = parse_term(&s, "(plus 1 1)").unwrap();
        assert!(matches!(learn_rule_step(&s, &bad), Err(KernelError::MalformedApplication(_))));
        let cup = parse_term(&s, "(cup {(P 4 2)} {(P 9 3)})").unwrap();
        assert_eq!(learn_rule_step(&s, &cup).unwrap().to_string(), "{(P 4 2) (P 9 3)}");
    }
}
