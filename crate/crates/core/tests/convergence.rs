use lbr_core::convergence::{
    check_modulus, interpret, interpret_along_states, numeral, phi, render, zero_via_moduli, ConvergenceError,
    FunChain, SamplePolicy, StarValue,
};
use lbr_core::corpus;
use lbr_core::kernel::{normalize, Term, Type};
use lbr_core::logic::{Document, Overrides};
use lbr_core::oracle::{eval_at, zero_loop, OracleTerm, ZeroConfig};
use lbr_core::realizer::state_family;
use lbr_core::states::KnowledgeState;

/// `s_m = λn. if n < m then n + 1 else 0`
fn growing(m: u64) -> Term {
    let n = Term::var("n", Type::Nat);
    let lt = Term::apps(Term::constant("lt", Type::arrows([Type::Nat, Type::Nat], Type::Bool)), [n.clone(), Term::num(m)]);
    Term::lam("n", Type::Nat, Term::ite(Type::Nat, lt, Term::succ(n), Term::Zero))
}

fn subst_phi(t: &Term, by: &Term) -> Term {
    t.rewrite(&mut |u| match u {
        Term::Const(c, _) if &**c == "Φ" => Some(by.clone()),
        _ => None,
    })
}

fn assert_law(v: &StarValue) {
    let rows = check_modulus(&v.modulus().unwrap(), &v.points().unwrap(), &SamplePolicy::default()).unwrap();
    let bad: Vec<String> = rows.iter().filter(|r| r.violation.is_some()).map(|r| r.to_string()).collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn zero_is_constant() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let v = interpret(&doc.sig, &Term::Zero, &chain).unwrap();
    for z in [0, 7, 100] {
        assert_eq!(v.points().unwrap().at(z).unwrap(), Term::Zero);
        assert_eq!(lbr_core::convergence::next_stable(&v, z).unwrap(), z);
    }
}

#[test]
fn phi_follows_the_chain() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let t = Term::app(phi(), Term::num(3));
    let v = interpret(&doc.sig, &t, &chain).unwrap();
    let p = v.points().unwrap();
    for m in 0..10 {
        assert_eq!(p.at(m).unwrap().as_num(), Some(if 3 < m { 4 } else { 0 }));
    }
    // Clause 2: stay at m when s_m(3) = s_{h(m)}(3), otherwise jump to h(m).
    let m = v.modulus().unwrap();
    let h = lbr_core::convergence::Fun::plus(1);
    assert_eq!(m.apply(&h, 0).unwrap(), 0);
    assert_eq!(m.apply(&h, 3).unwrap(), 4);
    assert_eq!(m.apply(&h, 5).unwrap(), 5);
    assert_law(&v);
}

#[test]
fn rec_matches_direct_evaluation() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    for k in 0..5 {
        // R 0 (λn λr. plus r (Φ n)) k
        let step = doc.parse_term("(lam (n Nat) (r Nat) (plus r (var n Nat)))").unwrap();
        let step = step.rewrite(&mut |u| match u {
            Term::Var(n, _) if &**n == "n" => Some(Term::app(phi(), Term::var("n", Type::Nat))),
            _ => None,
        });
        let t = Term::rec(Type::Nat, Term::Zero, step, Term::num(k));
        let v = interpret(&doc.sig, &t, &chain).unwrap();
        for m in 0..12 {
            let direct = normalize(&doc.sig, &subst_phi(&t, &growing(m))).unwrap();
            assert_eq!(v.points().unwrap().at(m).unwrap(), direct, "k={k} m={m}");
        }
        assert_law(&v);
    }
}

#[test]
fn rec_at_a_varying_count() {
    // R 0 (λn λr. S r) (Φ 2): the count itself converges.
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let step = doc.parse_term("(lam (n Nat) (r Nat) (S r))").unwrap();
    let t = Term::rec(Type::Nat, Term::Zero, step, Term::app(phi(), Term::num(2)));
    let v = interpret(&doc.sig, &t, &chain).unwrap();
    for m in 0..12 {
        let direct = normalize(&doc.sig, &subst_phi(&t, &growing(m))).unwrap();
        assert_eq!(v.points().unwrap().at(m).unwrap(), direct);
    }
    assert_law(&v);
}

#[test]
fn application_is_respected() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let u = doc.parse_term("(lam (x Nat) ((if Nat) (lt x 3) (plus x 1) 7))").unwrap();
    let a = Term::app(phi(), Term::num(1));
    let whole = interpret(&doc.sig, &Term::app(u.clone(), a.clone()), &chain).unwrap();
    let parts = interpret(&doc.sig, &u, &chain).unwrap().apply(interpret(&doc.sig, &a, &chain).unwrap()).unwrap();
    for m in 0..10 {
        assert_eq!(whole.points().unwrap().at(m).unwrap(), parts.points().unwrap().at(m).unwrap());
        let direct = normalize(&doc.sig, &subst_phi(&Term::app(u.clone(), a.clone()), &growing(m))).unwrap();
        assert_eq!(whole.points().unwrap().at(m).unwrap(), direct);
    }
    assert_law(&whole);
    assert!(render(&u).contains("⟦if⟧"));
}

#[test]
fn higher_type_if_and_pairs() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    // π₁ (if (eq (Φ 4) 0) ⟨1, λx. x⟩ ⟨2, λx. S x⟩) (Φ 0)
    let src = "(pair 1 (lam (x Nat) (var x Nat)))";
    let a = doc.parse_term(src).unwrap();
    let b = doc.parse_term("(pair 2 (lam (x Nat) (S (var x Nat))))").unwrap();
    let ty = Type::product(Type::Nat, Type::arrow(Type::Nat, Type::Nat));
    let cond = Term::apps(
        Term::constant("eq", Type::arrows([Type::Nat, Type::Nat], Type::Bool)),
        [Term::app(phi(), Term::num(4)), Term::Zero],
    );
    let t = Term::app(Term::proj(1, Term::ite(ty, cond, a, b)), Term::app(phi(), Term::num(0)));
    let v = interpret(&doc.sig, &t, &chain).unwrap();
    for m in 0..12 {
        let direct = normalize(&doc.sig, &subst_phi(&t, &growing(m))).unwrap();
        assert_eq!(v.points().unwrap().at(m).unwrap(), direct);
    }
    assert_law(&v);
}

#[test]
fn decreasing_chain_is_rejected() {
    let doc = Document::default();
    let chain = FunChain::new(|m, _| Ok(if m < 3 { 5 } else { 6 }));
    let v = interpret(&doc.sig, &Term::app(phi(), Term::num(0)), &chain).unwrap();
    let p = v.points().unwrap();
    p.at(0).unwrap();
    assert!(matches!(p.at(4), Err(ConvergenceError::ChainNotMonotone { .. })));
}

#[test]
fn y_is_unsupported() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let t = Term::Y(Type::Nat);
    assert!(matches!(interpret(&doc.sig, &t, &chain), Err(ConvergenceError::Unsupported(_))));
}

#[test]
fn add_p_zero() {
    let doc = Document::parse("(pred P (x) y (eq y (plus x 2)))").unwrap();
    let t = doc.parse_term("(lam (n Nat) (Add.P 3 5))").unwrap();
    let t = OracleTerm::new(&doc.sig, t).unwrap();
    let z = zero_via_moduli(&doc.sig, &t, 0).unwrap();
    assert_eq!(z.state.to_string(), "{(P 3 5)}");
    let run = zero_loop(&doc.sig, &Term::app(t.term.clone(), Term::num(0)), &KnowledgeState::empty(), ZeroConfig::default())
        .unwrap();
    assert_eq!(run.zero, z.state);
    assert_eq!(z.chain[z.k as usize + 1], z.state);

    let e = OracleTerm::new(&doc.sig, doc.parse_term("(lam (n Nat) {})").unwrap()).unwrap();
    let z = zero_via_moduli(&doc.sig, &e, 3).unwrap();
    assert!(z.state.is_empty());
    assert_eq!(z.k, 0);
}

fn corpus_families() -> Vec<(String, Document, OracleTerm, Vec<u64>)> {
    let mut out = Vec::new();
    for (src, name, f, args) in [
        (corpus::MINIMUM, "minpoint", vec![4, 6, 1, 3, 0, 2], vec![0, 2, 5]),
        (corpus::COQUAND, "coquand", vec![3, 2, 1, 0], vec![1, 2]),
        (corpus::COQUAND, "coquand", vec![4, 6, 1, 3, 0, 2], vec![1, 2, 3]),
    ] {
        let mut o = Overrides::new();
        o.insert("f".into(), f);
        let doc = Document::parse_with(src, &o).unwrap();
        let c = doc.check(doc.theorem(name).unwrap()).unwrap();
        let fam = state_family(&doc.sig, &c.realizer, &c.conclusion).unwrap();
        out.push((name.to_string(), doc, fam, args));
    }
    out
}

#[test]
fn corpus_zeros_agree() {
    for (name, doc, fam, args) in corpus_families() {
        for n in args {
            let tn = Term::app(fam.term.clone(), Term::num(n));
            let z = zero_via_moduli(&doc.sig, &fam, n).unwrap_or_else(|e| panic!("{name} {n}: {e}"));
            let at = eval_at(&doc.sig, &tn, &z.state, 1 << 24).unwrap();
            assert!(at.as_state().unwrap().is_empty(), "{name} {n}");
            let run = zero_loop(&doc.sig, &tn, &KnowledgeState::empty(), ZeroConfig::default()).unwrap();
            let at = eval_at(&doc.sig, &tn, &run.zero, 1 << 24).unwrap();
            assert!(at.as_state().unwrap().is_empty());
        }
    }
}

#[test]
fn corpus_modulus_law() {
    for (name, doc, fam, args) in corpus_families() {
        for n in args {
            let tn = Term::app(fam.term.clone(), Term::num(n));
            let run = zero_loop(&doc.sig, &tn, &KnowledgeState::empty(), ZeroConfig::default()).unwrap();
            let states: Vec<KnowledgeState> = run.trace.iter().map(|e| e.state.clone()).collect();
            let st = states.clone();
            let at = move |m: u64| Ok(st[(m as usize).min(st.len() - 1)].clone());
            let v = interpret_along_states(&doc.sig, &tn, at).unwrap_or_else(|e| panic!("{name} {n}: {e}"));
            for m in 0..states.len() as u64 + 3 {
                let s = &states[(m as usize).min(states.len() - 1)];
                let direct = eval_at(&doc.sig, &tn, s, 1 << 24).unwrap();
                assert_eq!(v.points().unwrap().at(m).unwrap(), direct, "{name} {n} at {m}");
            }
            assert_law(&v);
        }
    }
}

#[test]
fn numerals_feed_functions() {
    let doc = Document::default();
    let chain = FunChain::from_terms(&doc.sig, growing);
    let f = interpret(&doc.sig, &phi(), &chain).unwrap();
    let v = f.apply(numeral(6)).unwrap();
    assert_eq!(v.points().unwrap().at(9).unwrap().as_num(), Some(7));
}
