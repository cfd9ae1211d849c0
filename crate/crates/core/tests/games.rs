use std::sync::Arc;

use lbr_core::corpus;
use lbr_core::games::{
    atom_value, code, run_1back, strategy_to_realizer, BMove, BPlay, FnAbelard, FnEloise, GResult, GameError,
    LearningStrategy, Move, Player, RandomAbelard, RealizerStrategy, ScriptedAbelard, E_PRED,
};
use lbr_core::kernel::{Signature, Term, DEFAULT_FUEL};
use lbr_core::logic::{Document, Formula, Overrides};
use lbr_core::realizer::{realizes_bounded, Bound, Candidates, Verdict};
use lbr_core::states::KnowledgeState;

fn theorem(src: &str, name: &str, f: Option<&[u64]>) -> (Document, Term, Formula) {
    let mut o = Overrides::new();
    if let Some(f) = f {
        o.insert("f".into(), f.to_vec());
    }
    let doc = Document::parse_with(src, &o).unwrap();
    let c = doc.check(doc.theorem(name).unwrap()).unwrap();
    (doc, c.realizer, c.conclusion)
}

#[test]
fn em1_trace() {
    let (doc, u, a) = theorem(corpus::EM1, "em1", None);
    let eloise = RealizerStrategy::new(&doc.sig, &a, &u).with_preservation(Bound { quantifier: 5, fuel: DEFAULT_FUEL });
    let mut abelard = ScriptedAbelard::new([Move::Num(4), Move::Num(2)]);
    let t = run_1back(&doc.sig, &a, &eloise, &mut abelard, 20).unwrap();
    assert_eq!(t.winner, Player::Eloise);
    assert_eq!(t.backtracks, 1);
    let moves: Vec<String> = t.records.iter().map(|r| r.mv.to_string()).collect();
    assert_eq!(moves, ["4", "right", "2", "backtrack to 1", "left", "2"]);
    assert_eq!(t.knowledge.unwrap().to_string(), "{(P 4 2)}");
    assert_eq!(t.records[3].knowledge.as_ref().unwrap().to_string(), "{(P 4 2)}");
    assert!(t.records[1].knowledge.as_ref().unwrap().is_empty());
}

#[test]
fn em1_non_square_needs_no_backtrack() {
    let (doc, u, a) = theorem(corpus::EM1, "em1", None);
    let eloise = RealizerStrategy::new(&doc.sig, &a, &u);
    let mut abelard = ScriptedAbelard::new([Move::Num(5), Move::Num(2)]);
    let t = run_1back(&doc.sig, &a, &eloise, &mut abelard, 20).unwrap();
    assert_eq!(t.winner, Player::Eloise);
    assert_eq!(t.backtracks, 0);
}

/// Abelard refutes "y is the least value" whenever he can.
fn counterexample(f: Vec<u64>) -> impl FnMut(&BPlay, &Formula) -> GResult<Move> {
    move |play, pos| {
        let y = match play.current()[0] {
            Move::Num(y) => y,
            m => panic!("unexpected {m}"),
        };
        let below = (0..f.len()).find(|&b| f[b] < y);
        Ok(match (pos, below) {
            (Formula::And(..), Some(_)) => Move::Left,
            (Formula::And(..), None) => Move::Right,
            (_, b) => Move::Num(b.unwrap_or(0) as u64),
        })
    }
}

#[test]
fn minimum_backtracks_at_most_b() {
    for b in 0..=6u64 {
        let f: Vec<u64> = (0..=b).rev().collect();
        let (doc, u, a) = theorem(corpus::MINIMUM, "minimum", Some(&f));
        let eloise = RealizerStrategy::new(&doc.sig, &a, &u);
        let t = run_1back(&doc.sig, &a, &eloise, &mut FnAbelard(counterexample(f.clone())), 200).unwrap();
        assert_eq!(t.winner, Player::Eloise, "B = {b}");
        assert!(t.backtracks as u64 <= b, "B = {b}: {} backtracks", t.backtracks);
    }
}

#[test]
fn random_playouts_are_won() {
    let cases: [(&str, &str, Option<&[u64]>); 4] = [
        (corpus::EM1, "em1", None),
        (corpus::MINIMUM, "minimum", Some(&[5, 3, 4, 1, 2, 6])),
        (corpus::MINIMUM, "minpoint", Some(&[5, 3, 4, 1, 2, 6])),
        (corpus::COQUAND, "coquand", Some(&[3, 2, 1, 0])),
    ];
    for (src, name, f) in cases {
        let (doc, u, a) = theorem(src, name, f);
        for seed in 0..1000 {
            let eloise = RealizerStrategy::new(&doc.sig, &a, &u);
            let mut abelard = RandomAbelard::new(seed, 6);
            let t = run_1back(&doc.sig, &a, &eloise, &mut abelard, 200)
                .unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
            assert_eq!(t.winner, Player::Eloise, "{name} seed {seed}");
        }
    }
}

#[test]
fn preservation_holds_along_plays() {
    let (doc, u, a) = theorem(corpus::MINIMUM, "minimum", Some(&[4, 2, 3, 0, 1]));
    let bound = Bound { quantifier: 5, fuel: DEFAULT_FUEL };
    for seed in 0..50 {
        let eloise = RealizerStrategy::new(&doc.sig, &a, &u).with_preservation(bound);
        let t = run_1back(&doc.sig, &a, &eloise, &mut RandomAbelard::new(seed, 5), 200).unwrap();
        assert_eq!(t.winner, Player::Eloise);
    }
}

#[test]
fn broken_realizer_is_caught() {
    let (doc, _, a) = theorem(corpus::EM1, "em1", None);
    // Always "not a square", learning nothing.
    let u = doc.parse_term("(lam (x Nat) (pair false (pair (pair 0 {}) (lam (y Nat) {}))))").unwrap();
    let eloise = RealizerStrategy::new(&doc.sig, &a, &u).with_preservation(Bound::default());
    let mut abelard = ScriptedAbelard::new([Move::Num(4), Move::Num(2)]);
    let err = run_1back(&doc.sig, &a, &eloise, &mut abelard, 20).unwrap_err();
    assert!(matches!(err, GameError::PreservationViolated(_)), "{err}");
}

fn p_holds(sig: &Signature, play: &BPlay, moves: &[Move]) -> bool {
    !atom_value(sig, &play.position_at(moves).unwrap(), DEFAULT_FUEL).unwrap()
}

/// Winning ω for EM1: claim "no square root" until a lost play shows one.
fn em1_omega(sig: Signature) -> impl Fn(&BPlay) -> GResult<BMove> + Send + Sync {
    move |play| {
        let cur = play.current();
        let n = cur[0];
        let root = play.plays.iter().find_map(|p| match p.as_slice() {
            [x, Move::Right, m] if *x == n && p_holds(&sig, play, p) => Some(*m),
            _ => None,
        });
        Ok(match cur.len() {
            1 => BMove::Extend { mv: if root.is_some() { Move::Left } else { Move::Right } },
            2 => BMove::Extend { mv: root.unwrap_or(Move::Num(0)) },
            _ => BMove::Backtrack { keep: 1 },
        })
    }
}

#[test]
fn omega_wins_em1() {
    let (doc, _, a) = theorem(corpus::EM1, "em1", None);
    let eloise = FnEloise(em1_omega(doc.sig.clone()));
    for seed in 0..100 {
        let t = run_1back(&doc.sig, &a, &eloise, &mut RandomAbelard::new(seed, 9), 20).unwrap();
        assert_eq!(t.winner, Player::Eloise);
        assert!(t.backtracks <= 1);
    }
}

#[test]
fn learning_strategy_em1() {
    let (doc, _, a) = theorem(corpus::EM1, "em1", None);
    let ls = LearningStrategy::new(&doc.sig, &a, FnEloise(em1_omega(doc.sig.clone()))).unwrap();
    let s0 = KnowledgeState::empty();
    let n = Move::Num(4);
    assert_eq!(ls.omega0(&s0, &[n]).unwrap(), Move::Right);
    assert!(ls.omega1(&s0, &[n, Move::Right, Move::Num(1)]).unwrap().is_empty());
    let s1 = ls.omega1(&s0, &[n, Move::Right, Move::Num(2)]).unwrap();
    assert_eq!(s1.len(), 1);
    let e = s1.atoms().next().unwrap();
    assert_eq!(e.pred.as_ref(), E_PRED);
    let from = code::decode(&a, e.args[0]).unwrap();
    let to = code::decode(&a, e.witness).unwrap();
    assert_eq!(from.plays, vec![vec![], vec![n]]);
    assert_eq!(to.plays, vec![vec![], vec![n], vec![n, Move::Right], vec![n, Move::Right, Move::Num(2)], vec![n]]);
    assert!(ls.improves(e.args[0], e.witness).unwrap());
    assert!(!ls.improves(e.witness, e.args[0]).unwrap());

    assert_eq!(ls.omega0(&s1, &[n]).unwrap(), Move::Left);
    assert_eq!(ls.omega0(&s1, &[n, Move::Left]).unwrap(), Move::Num(2));
    assert!(ls.omega1(&s1, &[n, Move::Left, Move::Num(2)]).unwrap().is_empty());
    // Other arguments are unaffected.
    assert_eq!(ls.omega0(&s1, &[Move::Num(9)]).unwrap(), Move::Right);
}

#[test]
fn completeness_realizer_em1() {
    let (doc, _, a) = theorem(corpus::EM1, "em1", None);
    let ls = Arc::new(LearningStrategy::new(&doc.sig, &a, FnEloise(em1_omega(doc.sig.clone()))).unwrap());
    let r = strategy_to_realizer(ls.clone()).unwrap();
    assert_eq!(r.term.ty, lbr_core::realizer::realizer_type(&a));
    assert!(r.psi.contains("Chi.E"));
    let bound = Bound { quantifier: 5, fuel: DEFAULT_FUEL };
    let s0 = KnowledgeState::empty();
    let v = realizes_bounded(&r.sig, &r.term.term, &a, &s0, bound, &Candidates::new()).unwrap();
    assert_eq!(v, Verdict::Realized);
    let s1 = ls.omega1(&s0, &[Move::Num(4), Move::Right, Move::Num(2)]).unwrap();
    let v = realizes_bounded(&r.sig, &r.term.term, &a, &s1, bound, &Candidates::new()).unwrap();
    assert_eq!(v, Verdict::Realized);

    // The realizer plays like ω once it has learned.
    let eloise = RealizerStrategy::new(&r.sig, &a, &r.term.term);
    let mut abelard = ScriptedAbelard::new([Move::Num(4), Move::Num(2)]);
    let t = run_1back(&r.sig, &a, &eloise, &mut abelard, 20).unwrap();
    assert_eq!(t.winner, Player::Eloise);
    assert_eq!(t.backtracks, 1);
}

#[test]
fn learning_stabilises_on_exists() {
    let doc = Document::parse("").unwrap();
    let a = doc.parse_formula("(ex y (atom eq y 2))").unwrap();
    let sig = doc.sig.clone();
    // Try y = number of lost plays so far.
    let omega = FnEloise(move |play: &BPlay| {
        if play.current().is_empty() {
            let lost = play.plays.iter().filter(|p| p.len() == 1).count() as u64;
            return Ok(BMove::Extend { mv: Move::Num(lost) });
        }
        let _ = &sig;
        Ok(BMove::Backtrack { keep: 0 })
    });
    let ls = LearningStrategy::new(&doc.sig, &a, omega).unwrap();
    let mut s = KnowledgeState::empty();
    let mut tried = Vec::new();
    loop {
        let y = ls.omega0(&s, &[]).unwrap();
        tried.push(y);
        let learned = ls.omega1(&s, &[y]).unwrap();
        if learned.is_empty() {
            break;
        }
        s = s.cup(&learned);
        assert!(tried.len() < 10);
    }
    assert_eq!(tried, [Move::Num(0), Move::Num(1), Move::Num(2)]);
    assert_eq!(s.len(), 2);

    let r = strategy_to_realizer(Arc::new(ls)).unwrap();
    for st in [KnowledgeState::empty(), s] {
        let v = realizes_bounded(&r.sig, &r.term.term, &a, &st, Bound::default(), &Candidates::new()).unwrap();
        assert_eq!(v, Verdict::Realized);
    }
}

#[test]
fn true_atom_learns_nothing() {
    let doc = Document::parse("").unwrap();
    let a = doc.parse_formula("(atom true)").unwrap();
    let ls = LearningStrategy::new(&doc.sig, &a, FnEloise(|_: &BPlay| Ok(BMove::Backtrack { keep: 0 }))).unwrap();
    assert!(ls.omega1(&KnowledgeState::empty(), &[]).unwrap().is_empty());
    let r = strategy_to_realizer(Arc::new(ls)).unwrap();
    let v = realizes_bounded(&r.sig, &r.term.term, &a, &KnowledgeState::empty(), Bound::default(), &Candidates::new())
        .unwrap();
    assert_eq!(v, Verdict::Realized);
}
