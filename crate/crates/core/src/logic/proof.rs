use std::fmt;

use crate::kernel::{print_term_with, Name, PrintOpts, Term};

use super::formula::{print_formula, Formula};

/// Natural deduction proof trees. Hypotheses are named by labels; quantifier
/// rules name their eigenvariables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Proof {
    /// A hypothesis. Free hypotheses carry their formula.
    Hyp(Name, Option<Formula>),
    AndI(Box<Proof>, Box<Proof>),
    AndE(u8, Box<Proof>),
    ImpI(Name, Formula, Box<Proof>),
    ImpE(Box<Proof>, Box<Proof>),
    /// Disjunction introduction on side `0` or `1`; the formula is the other
    /// disjunct.
    OrI(u8, Formula, Box<Proof>),
    OrE(Box<Proof>, Name, Box<Proof>, Name, Box<Proof>),
    ForallI(Name, Box<Proof>),
    ForallE(Box<Proof>, Term),
    /// `∃x A` with witness term and a proof of `A[t/x]`.
    ExistsI(Formula, Term, Box<Proof>),
    /// From `∃x A`, eigenvariable `α`, hypothesis label for `A[α/x]`.
    ExistsE(Box<Proof>, Name, Name, Box<Proof>),
    /// Induction for `∀α A` from `A[0]` and `∀α. A → A[Sα]`.
    Induction(Formula, Box<Proof>, Box<Proof>),
    /// Post rule with its atomic conclusion.
    Post(Name, Formula, Vec<Proof>),
    AtomicAxiom(Formula),
    Em1(Name),
    ChiAxiom(Name, Vec<Term>, Term),
    PhiAxiom(Name, Vec<Term>),
}

impl Proof {
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Proof> {
        match self {
            Proof::Hyp(..) | Proof::AtomicAxiom(_) | Proof::Em1(_) | Proof::ChiAxiom(..) | Proof::PhiAxiom(..) => {
                vec![]
            }
            Proof::AndI(a, b) | Proof::ImpE(a, b) | Proof::Induction(_, a, b) => vec![a, b],
            Proof::AndE(_, a) | Proof::ImpI(_, _, a) | Proof::OrI(_, _, a) | Proof::ForallI(_, a) => vec![a],
            Proof::ForallE(a, _) | Proof::ExistsI(_, _, a) => vec![a],
            Proof::OrE(a, _, b, _, c) => vec![a, b, c],
            Proof::ExistsE(a, _, _, b) => vec![a, b],
            Proof::Post(_, _, ps) => ps.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Proof> {
        match self {
            Proof::Hyp(..) | Proof::AtomicAxiom(_) | Proof::Em1(_) | Proof::ChiAxiom(..) | Proof::PhiAxiom(..) => {
                vec![]
            }
            Proof::AndI(a, b) | Proof::ImpE(a, b) | Proof::Induction(_, a, b) => vec![a, b],
            Proof::AndE(_, a) | Proof::ImpI(_, _, a) | Proof::OrI(_, _, a) | Proof::ForallI(_, a) => vec![a],
            Proof::ForallE(a, _) | Proof::ExistsI(_, _, a) => vec![a],
            Proof::OrE(a, _, b, _, c) => vec![a, b, c],
            Proof::ExistsE(a, _, _, b) => vec![a, b],
            Proof::Post(_, _, ps) => ps.iter_mut().collect(),
        }
    }

    /// Nodes in pre-order.
    pub fn nodes(&self) -> Vec<&Proof> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.nodes());
        }
        out
    }

    /// The `i`-th node in pre-order.
    pub fn node_mut(&mut self, i: usize) -> Option<&mut Proof> {
        fn go<'a>(p: &'a mut Proof, i: &mut usize) -> Option<&'a mut Proof> {
            if *i == 0 {
                return Some(p);
            }
            *i -= 1;
            for c in p.children_mut() {
                if let Some(r) = go(c, i) {
                    return Some(r);
                }
            }
            None
        }
        let mut i = i;
        go(self, &mut i)
    }
}

fn term(t: &Term) -> String {
    print_term_with(t, PrintOpts { bare_free: true }, &[])
}

pub fn print_proof(p: &Proof) -> String {
    let mut out = String::new();
    emit(p, &mut out);
    out
}

fn emit(p: &Proof, out: &mut String) {
    let sub = |out: &mut String, q: &Proof| {
        out.push(' ');
        emit(q, out);
    };
    match p {
        Proof::Hyp(x, None) => out.push_str(&format!("(hyp {x})")),
        Proof::Hyp(x, Some(a)) => out.push_str(&format!("(hyp {x} {})", print_formula(a))),
        Proof::AndI(a, b) => {
            out.push_str("(and-i");
            sub(out, a);
            sub(out, b);
            out.push(')');
        }
        Proof::AndE(i, a) => {
            out.push_str(&format!("(and-e{i}"));
            sub(out, a);
            out.push(')');
        }
        Proof::ImpI(x, a, b) => {
            out.push_str(&format!("(imp-i {x} {}", print_formula(a)));
            sub(out, b);
            out.push(')');
        }
        Proof::ImpE(a, b) => {
            out.push_str("(imp-e");
            sub(out, a);
            sub(out, b);
            out.push(')');
        }
        Proof::OrI(i, f, a) => {
            out.push_str(&format!("(or-i{i} {}", print_formula(f)));
            sub(out, a);
            out.push(')');
        }
        Proof::OrE(a, x, b, y, c) => {
            out.push_str("(or-e");
            sub(out, a);
            out.push_str(&format!(" ({x}"));
            sub(out, b);
            out.push_str(&format!(") ({y}"));
            sub(out, c);
            out.push_str("))");
        }
        Proof::ForallI(x, a) => {
            out.push_str(&format!("(all-i {x}"));
            sub(out, a);
            out.push(')');
        }
        Proof::ForallE(a, t) => {
            out.push_str("(all-e");
            sub(out, a);
            out.push_str(&format!(" {})", term(t)));
        }
        Proof::ExistsI(f, t, a) => {
            out.push_str(&format!("(ex-i {} {}", print_formula(f), term(t)));
            sub(out, a);
            out.push(')');
        }
        Proof::ExistsE(a, al, x, b) => {
            out.push_str("(ex-e");
            sub(out, a);
            out.push_str(&format!(" ({al} {x}"));
            sub(out, b);
            out.push_str("))");
        }
        Proof::Induction(f, a, b) => {
            out.push_str(&format!("(ind {}", print_formula(f)));
            sub(out, a);
            sub(out, b);
            out.push(')');
        }
        Proof::Post(r, c, ps) => {
            out.push_str(&format!("(post {r} {}", print_formula(c)));
            for q in ps {
                sub(out, q);
            }
            out.push(')');
        }
        Proof::AtomicAxiom(c) => out.push_str(&format!("(ax {})", print_formula(c))),
        Proof::Em1(p) => out.push_str(&format!("(em1 {p})")),
        Proof::ChiAxiom(p, ts, t) => {
            let args: Vec<String> = ts.iter().map(term).collect();
            out.push_str(&format!("(chi-ax {p} ({}) {})", args.join(" "), term(t)));
        }
        Proof::PhiAxiom(p, ts) => {
            let args: Vec<String> = ts.iter().map(term).collect();
            out.push_str(&format!("(phi-ax {p} ({}))", args.join(" ")));
        }
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_proof(self))
    }
}
