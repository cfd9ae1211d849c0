use std::sync::Arc;

use lbr_core::corpus::{CRITICALS, PROCEDURES};
use lbr_core::update::*;

fn fin(i: u64) -> OrdCode {
    OrdCode::Fin(i)
}

fn lv(i: u64) -> OrdCode {
    OrdCode::Vec(vec![i])
}

fn proc(name: &str) -> UpdateProcedure {
    let (_, src) = PROCEDURES.iter().find(|(n, _)| *n == name).unwrap();
    parse_procedure(src).unwrap()
}

fn criticals(name: &str) -> Arc<CriticalSet> {
    let (_, src) = CRITICALS.iter().find(|(n, _)| *n == name).unwrap();
    Arc::new(CriticalSet::parse(src).unwrap())
}

fn f3_is_5() -> UpdateProcedure {
    UpdateProcedure::host("f3", Ordinal::Fin(1), |f| {
        Ok(if f.get(&fin(0), 3) == 5 { Update::Empty } else { Update::learn(fin(0), 3, 5) })
    })
}

#[test]
fn flat_update_overwrites_one_point() {
    let g = oplus_flat(&Family::zero(), &Update::learn(fin(0), 3, 5));
    assert_eq!(g.get(&fin(0), 3), 5);
    assert_eq!(g.len(), 1);

    let f = Family::zero().with(fin(0), 1, 7).with(fin(0), 9, 2);
    assert_eq!(oplus_flat(&f, &Update::Empty), f);

    let u = Update::learn(fin(0), 9, 4);
    let once = oplus_flat(&f, &u);
    let twice = oplus_flat(&once, &u);
    for n in 0..=50 {
        assert_eq!(once.get(&fin(0), n), twice.get(&fin(0), n));
    }
}

#[test]
fn controlled_update_collapses_higher_levels() {
    let f = Family::zero().with(lv(0), 0, 3).with(lv(1), 0, 4).with(lv(1), 5, 6).with(lv(2), 1, 1);
    let g = oplus_transfinite(&f, &Update::learn(lv(0), 2, 8));
    assert_eq!(g.get(&lv(0), 0), 3);
    assert_eq!(g.get(&lv(0), 2), 8);
    for (l, n) in [(lv(1), 0), (lv(1), 5), (lv(2), 1)] {
        assert_eq!(g.get(&l, n), 0);
    }
    assert_eq!(oplus_transfinite(&f, &Update::Empty), f);

    let top = oplus_transfinite(&f, &Update::learn(lv(2), 1, 9));
    for (l, n, m) in f.iter().filter(|(l, _, _)| **l < lv(2)) {
        assert_eq!(top.get(l, n), m);
    }
    assert_eq!(top.get(&lv(2), 1), 9);
}

#[test]
fn learning_one_point() {
    let run = learning_process(&f3_is_5(), Mode::Transfinite, 10).unwrap();
    assert_eq!(run.trace.len(), 1);
    assert_eq!(run.zero.get(&fin(0), 3), 5);

    let empty = UpdateProcedure::host("empty", Ordinal::OmegaPow(1), |_| Ok(Update::Empty));
    let run = learning_process(&empty, Mode::Transfinite, 10).unwrap();
    assert!(run.trace.is_empty());
    assert!(run.zero.is_zero());
}

#[test]
fn budget_exceeded_names_the_pending_update() {
    let never = UpdateProcedure::host("never", Ordinal::Fin(1), |f| {
        let n = f.level(&fin(0)).len() as u64;
        Ok(Update::learn(fin(0), n, 1))
    });
    match learning_process(&never, Mode::Flat, 5) {
        Err(UpdateError::StepBudgetExceeded { steps: 5, last }) => assert_eq!(last, "<0, 5, 1>"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn flat_unary_traces_increase() {
    for name in ["u1", "fin2"] {
        let run = learning_process(&proc(name), Mode::Flat, 100).unwrap();
        assert!(weakly_increasing(&run.chain), "{name}");
    }
}

#[test]
fn omega_times_two_collapse_and_relearn() {
    let u = proc("omega-times-2");
    let run = learning_process(&u, Mode::Transfinite, 20).unwrap();
    let w = |n| OrdCode::OmegaPlus(1, n);
    let steps: Vec<_> = run.trace.iter().map(|s| s.update.clone()).collect();
    assert_eq!(
        steps,
        vec![Update::learn(w(0), 0, 2), Update::learn(w(1), 0, 3), Update::learn(w(0), 1, 5), Update::learn(w(1), 0, 8)]
    );
    let collapsed: Vec<_> = run.trace.iter().map(|s| s.collapsed.clone()).collect();
    assert_eq!(collapsed, vec![vec![], vec![], vec![(w(1), 0, 3)], vec![]]);
    assert!(u.eval(&run.zero).unwrap().is_empty());
    assert_eq!(run.lines().lines().nth(2).unwrap(), "3\t<w, 1, 5>\tcollapsed 1 value(s) on levels w+1..w+1");
}

#[test]
fn bar_zero_of_ordinal_one() {
    let z = zero_br(&f3_is_5(), 1000).unwrap();
    assert_eq!(z.family.get(&fin(0), 3), 5);
    let term = zero_br(&proc("u1"), 1000).unwrap();
    assert_eq!(term.family, z.family);
}

#[test]
fn bar_zero_of_ordinal_omega() {
    let z = zero_br(&proc("omega"), 100_000).unwrap();
    assert_eq!((z.family.get(&lv(0), 0), z.family.get(&lv(1), 0)), (1, 2));
}

#[test]
fn bar_zero_of_the_empty_procedure() {
    let empty = UpdateProcedure::host("empty", Ordinal::OmegaPow(2), |_| Ok(Update::Empty));
    assert!(zero_br(&empty, 10).unwrap().family.is_zero());
}

#[test]
fn every_corpus_procedure_has_both_zeros() {
    for (name, src) in PROCEDURES {
        let u = parse_procedure(src).unwrap();
        let run = learning_process(&u, Mode::Transfinite, 1000).unwrap();
        assert!(u.eval(&run.zero).unwrap().is_empty(), "{name}");
        let z = zero_br(&u, 1_000_000).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(u.eval(&z.family).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn every_corpus_procedure_passes_the_validator() {
    for (name, src) in PROCEDURES {
        let u = parse_procedure(src).unwrap();
        let report = validate(&u, &ProbeConfig::default()).unwrap();
        assert_eq!(report.probes, 500);
        assert!(report.ok(), "{name}: {:?}", report.violations.first());
    }
}

#[test]
fn term_and_host_codes_agree() {
    let u = proc("fin2");
    let f = Family::zero().with(fin(0), 0, 1);
    assert_eq!(u.eval(&f).unwrap(), Update::learn(fin(1), 1, 4));
    let code = encode_update(&Update::learn(fin(1), 1, 4)).unwrap();
    assert_eq!(decode_update(code, 2).unwrap(), Update::learn(fin(1), 1, 4));
    assert!(decode_update(code, 1).is_err());
}

#[test]
fn normalizing_epsilon_terms() {
    let s = EpsSubstitution::new();
    assert_eq!(eps_normalize(&Eps::parse("(eps x (= x x))").unwrap(), &s, 10).unwrap(), Eps::Num(0));

    let p = Eps::parse("(eps x (P x))").unwrap();
    let s = EpsSubstitution::new().with(&p, 4).unwrap();
    let a = Eps::pred("P", [p.clone()]);
    assert_eq!(eps_normalize(&a, &s, 10).unwrap(), Eps::parse("(P 4)").unwrap());

    // The inner term is canonical; once it is replaced by 3 the outer one
    // becomes the canonical ε x (x = S 3).
    let nest = Eps::parse("(eps x (= x (S (eps y (= y 3)))))").unwrap();
    let s = EpsSubstitution::new()
        .with(&Eps::parse("(eps y (= y 3))").unwrap(), 3)
        .unwrap()
        .with(&Eps::parse("(eps x (= x 4))").unwrap(), 4)
        .unwrap();
    let n = eps_normalize(&nest, &s, 10).unwrap();
    assert_eq!(n, Eps::Num(4));
    assert_eq!(eps_normalize(&n, &s, 10).unwrap(), n);
    assert!(matches!(eps_normalize(&nest, &s, 1), Err(UpdateError::FuelExhausted { limit: 1 })));
}

#[test]
fn critical_learns_the_least_witness() {
    let set = criticals("p4");
    let u = set.clone().procedure();
    let up = u.eval(&Family::zero()).unwrap();
    assert_eq!(up, Update::learn(lv(0), 0, 4));
    assert_eq!(set.term_at(0, 0).unwrap(), Eps::parse("(eps x (P x))").unwrap().canonical());
    assert!(u.eval(&Family::zero().with(lv(0), 0, 4)).unwrap().is_empty());

    let h = set.h_process(10).unwrap();
    assert_eq!(h.substitution.get(&Eps::parse("(eps x (P x))").unwrap()), 4);
}

#[test]
fn nested_criticals_relearn_after_collapse() {
    let set = criticals("nested");
    let h = set.h_process(20).unwrap();
    let o = Eps::parse("(eps x (Q x (eps y (lt x y))))").unwrap();
    let i1 = Eps::parse("(eps y (lt 1 y))").unwrap();
    let at = |u: &Update| match u {
        Update::Learn { level: OrdCode::Vec(l), arg, value } => (set.term_at(l[0], *arg).unwrap(), *value),
        other => panic!("unexpected update {other}"),
    };
    let steps: Vec<_> = h.run.trace.iter().map(|s| at(&s.update)).collect();
    assert_eq!(steps, vec![(o.canonical(), 2), (i1.canonical(), 2), (o.canonical(), 1)]);
    assert!(h.run.trace[0].collapsed.is_empty());
    assert_eq!(h.run.trace[1].collapsed.len(), 1);
    assert_eq!(h.run.trace[1].collapsed[0].0, lv(1));
    assert_eq!(h.substitution.get(&o), 1);
    assert_eq!(h.substitution.get(&i1), 2);
    assert!(set.check(&h.substitution).unwrap().iter().all(|b| *b));
}

#[test]
fn predecessor_criticals() {
    let set = criticals("pred");
    let h = set.h_process(20).unwrap();
    assert_eq!(h.substitution.get(&Eps::parse("(eps x (P x))").unwrap()), 4);
    assert_eq!(h.substitution.get(&Eps::parse("(eps y (= 4 (S y)))").unwrap()), 3);
}

#[test]
fn every_bundled_critical_set_is_solved() {
    for (name, _) in CRITICALS {
        let set = criticals(name);
        let h = set.h_process(100).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(set.check(&h.substitution).unwrap().iter().all(|b| *b), "{name}");
        assert!(validate(&set.clone().procedure(), &ProbeConfig::default()).unwrap().ok(), "{name}");
    }
}

#[test]
fn existential_witness_is_the_least() {
    let set = criticals("witness");
    let h = set.h_process(10).unwrap();
    let least = (0..).find(|x: &u64| x * x > 20).unwrap();
    assert_eq!(h.substitution.get(&Eps::parse("(eps x (P x))").unwrap()), least);
}

#[test]
fn empty_critical_list() {
    let s = h_process(EpsContext::default(), &[], 10).unwrap();
    assert!(s.is_empty());
}

#[test]
fn malformed_criticals_are_rejected() {
    for src in ["(-> (lt 1 2) (lt 2 3))", "(and (= 1 1) (= (eps x (= x 1)) 1))", "(-> (= 3 0) (= 3 (S (eps x (= 3 (S x))))))"]
    {
        let f = Eps::parse(src).unwrap();
        assert!(
            matches!(critical_update_procedure(EpsContext::default(), &[f]), Err(UpdateError::MalformedCritical(_))),
            "{src}"
        );
    }
}
