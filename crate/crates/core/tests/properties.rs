use lbr_core::corpus::{self, DOCUMENTS};
use lbr_core::kernel::{
    alpha_eq, normalize_by_steps, normalize_with_fuel, parse_term, parse_term_in, print_term, step, subst,
    typecheck, Ctx, Name, Signature, Strategy as Reduction, Term, Type,
};
use lbr_core::logic::{check_proof, print_formula, print_proof, Document, Formula, Overrides, Proof};
use lbr_core::oracle::{approximate, zero_loop, ZeroConfig};
use lbr_core::realizer::{realizer_type, state_family};
use lbr_core::states::KnowledgeState;
use lbr_core::update::{
    eps_normalize, oplus_transfinite, Eps, EpsSubstitution, Family, OrdCode, Update,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random well-typed terms of System T, printed in the surface syntax.
struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
    oracles: bool,
}

impl Gen {
    fn new(seed: u64, oracles: bool) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0, oracles }
    }

    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn nat(&mut self, d: u32, vars: &mut Vec<String>) -> String {
        if d == 0 {
            return match (vars.is_empty(), self.rng.gen_range(0..3)) {
                (false, 0) => vars.choose(&mut self.rng).unwrap().clone(),
                _ => self.rng.gen_range(0..5u64).to_string(),
            };
        }
        match self.rng.gen_range(0..11) {
            0 => self.nat(0, vars),
            1 => format!("(S {})", self.nat(d - 1, vars)),
            2 => {
                let op = ["plus", "monus", "max", "min"].choose(&mut self.rng).unwrap();
                format!("({op} {} {})", self.nat(d - 1, vars), self.nat(d - 1, vars))
            }
            3 => format!("(times {} 2)", self.nat(d - 1, vars)),
            4 => format!("((if Nat) {} {} {})", self.bool(d - 1, vars), self.nat(d - 1, vars), self.nat(d - 1, vars)),
            5 => {
                let x = self.name("v");
                let arg = self.nat(d - 1, vars);
                vars.push(x.clone());
                let body = self.nat(d - 1, vars);
                vars.pop();
                format!("((lam ({x} Nat) {body}) {arg})")
            }
            6 => {
                let (i, a) = (self.name("i"), self.name("a"));
                let base = self.nat(d - 1, vars);
                vars.push(i.clone());
                vars.push(a.clone());
                let body = self.nat(d - 1, vars);
                vars.truncate(vars.len() - 2);
                format!("((rec Nat) {base} (lam ({i} Nat) ({a} Nat) {body}) {})", self.rng.gen_range(0..4))
            }
            7 => {
                let (g, y) = (self.name("g"), self.name("y"));
                let arg = self.nat(d - 1, vars);
                vars.push(y.clone());
                let body = self.nat(d - 1, vars);
                vars.pop();
                format!("((lam ({g} (-> Nat Nat)) ({g} ({g} {arg}))) (lam ({y} Nat) {body}))")
            }
            8 => {
                let i = self.rng.gen_range(0..2);
                format!("(proj{i} (pair {} {}))", self.nat(d - 1, vars), self.nat(d - 1, vars))
            }
            9 if self.oracles => format!("(Phi.R {})", self.nat(d - 1, vars)),
            _ => format!("(plus {} 1)", self.nat(d - 1, vars)),
        }
    }

    fn bool(&mut self, d: u32, vars: &mut Vec<String>) -> String {
        if d == 0 {
            return if self.rng.gen() { "true".into() } else { "false".into() };
        }
        match self.rng.gen_range(0..5) {
            0 => self.bool(0, vars),
            1 => format!("(not {})", self.bool(d - 1, vars)),
            2 if self.oracles => format!("(Chi.R {})", self.nat(d - 1, vars)),
            _ => {
                let op = ["eq", "lt", "le"].choose(&mut self.rng).unwrap();
                format!("({op} {} {})", self.nat(d - 1, vars), self.nat(d - 1, vars))
            }
        }
    }
}

fn sig_r() -> Signature {
    let mut s = Signature::prelude();
    let body = parse_term(&s, "(lam (x Nat) (y Nat) (lt x y))").unwrap();
    s.add_predicate("R", 1, body).unwrap();
    s
}

fn closed_nat(seed: u64) -> (Signature, Term) {
    let sig = Signature::prelude();
    let src = Gen::new(seed, false).nat(4, &mut Vec::new());
    let t = parse_term(&sig, &src).unwrap_or_else(|e| panic!("{src}: {e}"));
    (sig, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn confluence(seed in any::<u64>()) {
        let (sig, t) = closed_nat(seed);
        let (lo, _) = normalize_by_steps(&sig, &t, Reduction::LeftmostOutermost, 1_000_000).unwrap();
        let (ri, _) = normalize_by_steps(&sig, &t, Reduction::RightmostInnermost, 1_000_000).unwrap();
        prop_assert_eq!(&lo, &ri, "{}", print_term(&t));
        let (nf, _) = normalize_with_fuel(&sig, &t, 1_000_000).unwrap();
        prop_assert_eq!(&nf, &lo);
        prop_assert!(lo.as_num().is_some(), "closed normal Nat term is not a numeral: {}", print_term(&lo));
    }

    #[test]
    fn subject_reduction(seed in any::<u64>()) {
        let (sig, t) = closed_nat(seed);
        let mut cur = t;
        for _ in 0..200 {
            prop_assert_eq!(typecheck(&cur, &Ctx::new(), &sig).unwrap(), Type::Nat);
            match step(&sig, &cur).unwrap() {
                Some(next) => cur = next,
                None => break,
            }
        }
    }

    #[test]
    fn closed_booleans_normalize_to_constants(seed in any::<u64>()) {
        let sig = Signature::prelude();
        let src = Gen::new(seed, false).bool(4, &mut Vec::new());
        let t = parse_term(&sig, &src).unwrap();
        let (nf, _) = normalize_with_fuel(&sig, &t, 1_000_000).unwrap();
        prop_assert!(nf.as_bool().is_some(), "{}", print_term(&nf));
    }

    #[test]
    fn terms_print_and_parse_back(seed in any::<u64>()) {
        let (sig, t) = closed_nat(seed);
        let again = parse_term(&sig, &print_term(&t)).unwrap();
        prop_assert!(alpha_eq(&again, &t));
    }

    #[test]
    fn approximation_commutes_with_numerals(seed in any::<u64>(), n in 0u64..6, atoms in prop::collection::vec((0u64..4, 1u64..4), 0..4)) {
        let sig = sig_r();
        let src = Gen::new(seed, true).nat(4, &mut vec!["x".to_string()]);
        let t = parse_term_in(&sig, &[("x", Type::Nat)], &src).unwrap();
        let s = state(&sig, &atoms);
        let a = subst(&approximate(&sig, &t, &s), "x", &Term::num(n));
        let b = approximate(&sig, &subst(&t, "x", &Term::num(n)), &s);
        prop_assert_eq!(a, b);
    }
}

/// A consistent state of `R(x, x + d)` atoms, dropping those that conflict.
fn state(sig: &Signature, atoms: &[(u64, u64)]) -> KnowledgeState {
    let mut s = KnowledgeState::empty();
    for (x, d) in atoms {
        let a = sig.atom("R", &[*x], x + d).unwrap();
        if let Some(t) = s.with_atom(a) {
            s = t;
        }
    }
    s
}

fn atoms_strategy() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((0u64..4, 1u64..4), 0..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cup_is_associative_with_unit(a in atoms_strategy(), b in atoms_strategy(), c in atoms_strategy()) {
        let sig = sig_r();
        let (s1, s2, s3) = (state(&sig, &a), state(&sig, &b), state(&sig, &c));
        prop_assert_eq!(s1.cup(&s2).cup(&s3), s1.cup(&s2.cup(&s3)));
        prop_assert_eq!(s1.cup(&KnowledgeState::empty()), s1.clone());
        prop_assert_eq!(KnowledgeState::empty().cup(&s1), s1);
    }

    #[test]
    fn cup_is_empty_only_for_empty_arguments(a in atoms_strategy(), b in atoms_strategy(), c in atoms_strategy()) {
        let sig = sig_r();
        let ss = [state(&sig, &a), state(&sig, &b), state(&sig, &c)];
        let all = ss.iter().fold(KnowledgeState::empty(), |acc, s| acc.cup(s));
        prop_assert_eq!(all.is_empty(), ss.iter().all(KnowledgeState::is_empty));
    }

    #[test]
    fn consistency_and_disjointness_pass_to_cup(a in atoms_strategy(), b in atoms_strategy(), c in atoms_strategy()) {
        let sig = sig_r();
        let (s, s1, s2) = (state(&sig, &a), state(&sig, &b), state(&sig, &c));
        let ok = |t: &KnowledgeState| s.consistent_with(t) && t.atoms().all(|x| !s.contains(&x));
        if ok(&s1) && ok(&s2) {
            prop_assert!(ok(&s1.cup(&s2)));
        }
    }

    #[test]
    fn false_atoms_are_rejected(x in 0u64..10, y in 0u64..10) {
        let sig = sig_r();
        prop_assert_eq!(sig.atom("R", &[x], y).is_ok(), x < y);
    }
}

#[test]
fn emitted_states_are_disjoint_and_consistent() {
    for (src, name, f, args) in [
        (corpus::MINIMUM, "minpoint", vec![4, 6, 1, 3, 0, 2], 0..4),
        (corpus::COQUAND, "coquand", vec![5, 3, 4, 1, 2, 0], 1..4),
    ] {
        let mut o = Overrides::new();
        o.insert("f".into(), f);
        let doc = Document::parse_with(src, &o).unwrap();
        let c = doc.check(doc.theorem(name).unwrap()).unwrap();
        let fam = state_family(&doc.sig, &c.realizer, &c.conclusion).unwrap();
        for n in args {
            let t = Term::app(fam.term.clone(), Term::num(n));
            let run = zero_loop(&doc.sig, &t, &KnowledgeState::empty(), ZeroConfig::default()).unwrap();
            for w in run.trace.windows(2) {
                assert!(w[0].state.leq(&w[1].state), "{name} {n}");
            }
            for e in &run.trace {
                assert!(e.emitted.consistent_with(&e.state), "{name} {n}");
                assert!(e.emitted.atoms().all(|a| !e.state.contains(&a)), "{name} {n}");
            }
        }
    }
}

fn corpus_theorems() -> Vec<(Document, usize)> {
    let mut out = Vec::new();
    for (_, src) in DOCUMENTS {
        let doc = Document::parse(src).unwrap();
        let n = doc.lemmas.len() + doc.theorems.len();
        for i in 0..n {
            out.push((doc.clone(), i));
        }
    }
    out
}

fn theorem(doc: &Document, i: usize) -> &lbr_core::logic::Theorem {
    doc.lemmas.values().chain(&doc.theorems).nth(i).unwrap()
}

#[test]
fn corpus_proofs_and_formulas_print_and_parse_back() {
    for (doc, i) in corpus_theorems() {
        let th = theorem(&doc, i);
        let p = doc.parse_proof(&print_proof(&th.proof)).unwrap();
        assert_eq!(p, th.proof, "{}", th.name);
        let f = doc.parse_formula(&print_formula(&th.formula)).unwrap();
        assert_eq!(f, th.formula, "{}", th.name);
    }
}

/// A node that cannot be derived in any context.
fn broken_node(kind: usize) -> Proof {
    let falsum = Formula::Atom(Term::False);
    match kind {
        0 => Proof::AtomicAxiom(falsum),
        1 => Proof::Hyp(Name::from("no_such_hypothesis"), None),
        2 => Proof::Em1(Name::from("NoSuchPredicate")),
        _ => Proof::Post(Name::from("no-such-rule"), Formula::Atom(Term::True), vec![Proof::AtomicAxiom(Formula::Atom(Term::True))]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corrupted_corpus_proofs_are_rejected(pick in any::<prop::sample::Index>(), node in any::<prop::sample::Index>(), kind in 0usize..4) {
        let all = corpus_theorems();
        let (doc, i) = &all[pick.index(all.len())];
        let th = theorem(doc, *i);
        let mut bad = th.clone();
        let k = node.index(th.proof.size());
        *bad.proof.node_mut(k).unwrap() = broken_node(kind);
        prop_assert!(doc.check(&bad).is_err(), "{} survived corruption of node {k}", th.name);
    }

    #[test]
    fn extraction_is_well_typed_under_mutation(pick in any::<prop::sample::Index>(), node in any::<prop::sample::Index>(), kind in 0usize..4) {
        let all = corpus_theorems();
        let (doc, i) = &all[pick.index(all.len())];
        let p = theorem(doc, *i).proof.clone();
        let wrap = |q: Proof| -> Proof {
            let top = Formula::Atom(parse_term(&doc.sig, "(lt 0 1)").unwrap());
            match kind {
                0 => Proof::AndI(Box::new(q.clone()), Box::new(q)),
                1 => Proof::AndE(0, Box::new(Proof::AndI(Box::new(q), Box::new(Proof::AtomicAxiom(top))))),
                2 => Proof::ImpI(Name::from("mutation_label"), top, Box::new(q)),
                _ => Proof::OrI(0, top, Box::new(q)),
            }
        };
        let mut inner = p.clone();
        let k = node.index(p.size());
        let target = inner.node_mut(k).unwrap();
        *target = wrap(target.clone());
        let c = match check_proof(&doc.sig, &doc.posts, &inner) {
            Ok(c) => c,
            Err(_) => check_proof(&doc.sig, &doc.posts, &wrap(p)).unwrap(),
        };
        let mut ctx = Ctx::new();
        for (x, f) in &c.hyps {
            ctx.push(x.clone(), realizer_type(f));
        }
        for x in &c.free_vars {
            ctx.push(x.clone(), Type::Nat);
        }
        prop_assert_eq!(typecheck(&c.realizer, &ctx, &doc.sig).unwrap(), realizer_type(&c.conclusion));
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Atom,
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
    Imp(Box<Shape>, Box<Shape>),
    All(Box<Shape>),
    Ex(Box<Shape>),
}

fn shape() -> impl Strategy<Value = Shape> {
    Just(Shape::Atom).prop_recursive(5, 32, 2, |s| {
        prop_oneof![
            (s.clone(), s.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
            (s.clone(), s.clone()).prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b))),
            (s.clone(), s.clone()).prop_map(|(a, b)| Shape::Imp(Box::new(a), Box::new(b))),
            s.clone().prop_map(|a| Shape::All(Box::new(a))),
            s.prop_map(|a| Shape::Ex(Box::new(a))),
        ]
    })
}

/// A formula of the given shape with atoms and variable names drawn from
/// `rng`.
fn dress(s: &Shape, sig: &Signature, rng: &mut ChaCha8Rng) -> Formula {
    let v = |rng: &mut ChaCha8Rng| ["x", "y", "z"].choose(rng).unwrap().to_string();
    match s {
        Shape::Atom => {
            let src = format!("({} {} {})", ["lt", "le", "eq"].choose(rng).unwrap(), rng.gen_range(0..9), rng.gen_range(0..9));
            Formula::Atom(parse_term(sig, &src).unwrap())
        }
        Shape::And(a, b) => Formula::and(dress(a, sig, rng), dress(b, sig, rng)),
        Shape::Or(a, b) => Formula::or(dress(a, sig, rng), dress(b, sig, rng)),
        Shape::Imp(a, b) => Formula::implies(dress(a, sig, rng), dress(b, sig, rng)),
        Shape::All(a) => Formula::forall(&v(rng), dress(a, sig, rng)),
        Shape::Ex(a) => Formula::exists(&v(rng), dress(a, sig, rng)),
    }
}

/// `|A|` read off the connective tree alone.
fn shape_type(s: &Shape) -> Type {
    match s {
        Shape::Atom => Type::State,
        Shape::And(a, b) => Type::product(shape_type(a), shape_type(b)),
        Shape::Or(a, b) => Type::product(Type::Bool, Type::product(shape_type(a), shape_type(b))),
        Shape::Imp(a, b) => Type::arrow(shape_type(a), shape_type(b)),
        Shape::All(a) => Type::arrow(Type::Nat, shape_type(a)),
        Shape::Ex(a) => Type::product(Type::Nat, shape_type(a)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn realizer_type_is_structural(s in shape(), seed1 in any::<u64>(), seed2 in any::<u64>()) {
        let sig = Signature::prelude();
        let a = dress(&s, &sig, &mut ChaCha8Rng::seed_from_u64(seed1));
        let b = dress(&s, &sig, &mut ChaCha8Rng::seed_from_u64(seed2));
        prop_assert_eq!(realizer_type(&a), realizer_type(&b));
        prop_assert_eq!(realizer_type(&a), shape_type(&s));
    }

    #[test]
    fn post_rules_are_sound(a in 0u64..6, b in 0u64..6, c in 0u64..6, w1 in prop::option::of(0u64..3), w2 in prop::option::of(0u64..3)) {
        let doc = Document::parse("(pred Q (x) y (eq y x))").unwrap();
        let src = "(imp-i h1 (atom le a b) (imp-i h2 (atom le b c) (post le-trans (atom le a c) (hyp h1) (hyp h2))))";
        let p = doc.parse_proof(src).unwrap();
        let ck = check_proof(&doc.sig, &doc.posts, &p).unwrap();
        let r = [("a", a), ("b", b), ("c", c)].iter().fold(ck.realizer.clone(), |t, (x, n)| subst(&t, x, &Term::num(*n)));
        // A state literal realizes a false atom only when it is non-empty.
        let realizer = |holds: bool, w: Option<u64>| -> KnowledgeState {
            match (holds, w) {
                (true, None) => KnowledgeState::empty(),
                (_, w) => doc.sig.state([("Q".to_string(), vec![w.unwrap_or(0)], w.unwrap_or(0))]).unwrap(),
            }
        };
        let (p1, p2) = (a <= b, b <= c);
        let (u1, u2) = (realizer(p1, w1), realizer(p2, w2));
        let applied = Term::apps(r, [Term::StateConst(u1), Term::StateConst(u2)]);
        let (nf, _) = normalize_with_fuel(&doc.sig, &applied, 100_000).unwrap();
        if nf.as_state().unwrap().is_empty() {
            prop_assert!(p1 && p2 && a <= c);
        }
    }
}

/// Random first-order ε-expressions over `lt`, `=` and `P`.
fn eps_term(rng: &mut ChaCha8Rng, d: u32, vars: &mut Vec<String>) -> Eps {
    match (d, rng.gen_range(0..5)) {
        (0, _) | (_, 0) => match (vars.is_empty(), rng.gen_range(0..2)) {
            (false, 0) => Eps::var(vars.choose(rng).unwrap()),
            _ => Eps::Num(rng.gen_range(0..4)),
        },
        (_, 1) => Eps::succ(eps_term(rng, d - 1, vars)),
        _ => {
            let x = format!("x{}", vars.len());
            vars.push(x.clone());
            let body = eps_formula(rng, d - 1, vars);
            vars.pop();
            Eps::choice(&x, body)
        }
    }
}

fn eps_formula(rng: &mut ChaCha8Rng, d: u32, vars: &mut Vec<String>) -> Eps {
    let (a, b) = (eps_term(rng, d, vars), eps_term(rng, d, vars));
    match rng.gen_range(0..4) {
        0 => Eps::eq(a, b),
        1 => Eps::pred("lt", [a, b]),
        2 => Eps::not(Eps::pred("P", [a])),
        _ => Eps::imp(Eps::pred("P", [a]), Eps::eq(b, Eps::Num(1))),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eps_normal_forms_are_fixed_points(seed in any::<u64>(), values in prop::collection::vec(0u64..5, 8)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = eps_formula(&mut rng, 3, &mut Vec::new());
        let mut s = EpsSubstitution::new();
        for (c, v) in e.choices().into_iter().filter(|c| c.is_canonical()).zip(values.iter().cycle()) {
            s.insert(c, *v).unwrap();
        }
        let n = eps_normalize(&e, &s, 1000).unwrap();
        prop_assert!(n.choices().iter().all(|c| !c.is_closed()), "{}", n);
        prop_assert_eq!(eps_normalize(&n, &s, 1000).unwrap(), n.clone());
        prop_assert_eq!(Eps::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn controlled_update_collapses(points in prop::collection::vec((0u64..5, 0u64..4, 1u64..9), 0..12), level in 0u64..5, arg in 0u64..4, value in 0u64..9) {
        let lv = |i: u64| OrdCode::Vec(vec![i]);
        let f = points.iter().fold(Family::zero(), |f, (l, n, m)| f.with(lv(*l), *n, *m));
        let g = oplus_transfinite(&f, &Update::learn(lv(level), arg, value));
        for l in 0..5 {
            for n in 0..4 {
                let want = match l.cmp(&level) {
                    std::cmp::Ordering::Less => f.get(&lv(l), n),
                    std::cmp::Ordering::Equal if n == arg => value,
                    std::cmp::Ordering::Equal => f.get(&lv(l), n),
                    std::cmp::Ordering::Greater => 0,
                };
                prop_assert_eq!(g.get(&lv(l), n), want);
            }
        }
    }
}
