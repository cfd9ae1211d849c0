use lbr_core::corpus;
use lbr_core::logic::{Document, Overrides};
use lbr_core::oracle::ZeroConfig;
use lbr_core::realizer::{extract_witness, realizes_bounded, Bound, Candidates};
use proptest::prelude::*;

fn with_f(src: &str, f: &[u64]) -> Document {
    let mut o = Overrides::new();
    o.insert("f".into(), f.to_vec());
    Document::parse_with(src, &o).unwrap()
}

fn coquand_oracle(f: &[u64], a: u64) -> u64 {
    let at = |x: u64| f.get(x as usize).copied().unwrap_or(0);
    let mut n = 0;
    while at(n) > at(n + a) {
        n += a;
    }
    n
}

fn coquand_witness(f: &[u64], a: u64) -> (u64, lbr_core::realizer::Witness) {
    let doc = with_f(corpus::COQUAND, f);
    let th = doc.theorem("coquand").unwrap();
    let c = doc.check(th).unwrap();
    let w = extract_witness(&doc.sig, &c.realizer, &c.conclusion, &[a], ZeroConfig::default()).unwrap();
    (w.value(), w)
}

#[test]
fn coquand_sample_table() {
    let (m, w) = coquand_witness(&[3, 2, 1, 0], 1);
    assert_eq!(m, 3);
    assert_eq!(w.zero.to_string(), "{(P 1 1 3) (P 1 2 2) (P 1 3 1)}");
}

#[test]
fn minpoint_finds_least_value() {
    let doc = with_f(corpus::MINIMUM, &[5, 4, 3, 2, 1, 0]);
    let th = doc.theorem("minpoint").unwrap();
    let c = doc.check(th).unwrap();
    // Learning is lazy: only the counterexample at the queried point is used.
    let w = extract_witness(&doc.sig, &c.realizer, &c.conclusion, &[2], ZeroConfig::default()).unwrap();
    assert_eq!(w.value(), 2);
    let w = extract_witness(&doc.sig, &c.realizer, &c.conclusion, &[5], ZeroConfig::default()).unwrap();
    assert_eq!(w.value(), 5);
    assert_eq!(w.run.learning_steps(), 1);

    let doc = with_f(corpus::MINIMUM, &[0]);
    let c = doc.check(doc.theorem("minpoint").unwrap()).unwrap();
    let w = extract_witness(&doc.sig, &c.realizer, &c.conclusion, &[4], ZeroConfig::default()).unwrap();
    assert_eq!(w.value(), 0);
    assert_eq!(w.run.learning_steps(), 0);
}

#[test]
fn witness_trace_states_are_realizing() {
    let doc = with_f(corpus::COQUAND, &[4, 6, 1, 3, 0, 2]);
    let c = doc.check(doc.theorem("coquand").unwrap()).unwrap();
    let w = extract_witness(&doc.sig, &c.realizer, &c.conclusion, &[2], ZeroConfig::default()).unwrap();
    for e in &w.run.trace {
        let v = realizes_bounded(&doc.sig, &c.realizer, &c.conclusion, &e.state, Bound::default(), &Candidates::new())
            .unwrap();
        assert!(!v.is_refuted(), "{v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coquand_matches_brute_force(f in prop::collection::vec(0u64..8, 1..8), a in 1u64..=5) {
        let (m, _) = coquand_witness(&f, a);
        prop_assert_eq!(m, coquand_oracle(&f, a));
    }
}
