use thiserror::Error;

use crate::kernel::Term;

pub const MAX_ALPHABET: usize = 20;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TautError {
    #[error("boolean skeleton has {0} distinct atoms, more than {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
}

/// Boolean skeleton of a `Bool` term over its maximal non-connective
/// subterms.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Skel {
    Const(bool),
    Var(usize),
    Not(Box<Skel>),
    Bin(&'static str, Box<Skel>, Box<Skel>),
}

fn skeleton(t: &Term, alphabet: &mut Vec<Term>) -> Skel {
    if let Some(b) = t.as_bool() {
        return Skel::Const(b);
    }
    let (head, args) = t.spine();
    if let Term::Const(c, _) = head {
        match (&**c, args.len()) {
            ("not", 1) => return Skel::Not(Box::new(skeleton(args[0], alphabet))),
            (op @ ("and" | "or" | "imp" | "iff"), 2) => {
                let op: &'static str = match op {
                    "and" => "and",
                    "or" => "or",
                    "imp" => "imp",
                    _ => "iff",
                };
                let a = skeleton(args[0], alphabet);
                let b = skeleton(args[1], alphabet);
                return Skel::Bin(op, Box::new(a), Box::new(b));
            }
            _ => {}
        }
    }
    let idx = match alphabet.iter().position(|u| u == t) {
        Some(i) => i,
        None => {
            alphabet.push(t.clone());
            alphabet.len() - 1
        }
    };
    Skel::Var(idx)
}

fn eval(s: &Skel, v: u32) -> bool {
    match s {
        Skel::Const(b) => *b,
        Skel::Var(i) => v >> i & 1 == 1,
        Skel::Not(a) => !eval(a, v),
        Skel::Bin(op, a, b) => {
            let (x, y) = (eval(a, v), eval(b, v));
            match *op {
                "and" => x && y,
                "or" => x || y,
                "imp" => !x || y,
                _ => x == y,
            }
        }
    }
}

/// Whether `conclusion` is true under every assignment to the atoms of the
/// boolean skeleton that makes all premises true. Atoms are compared
/// syntactically, so callers should normalize first.
pub fn is_tautological_consequence(premises: &[Term], conclusion: &Term) -> Result<bool, TautError> {
    let mut alphabet = Vec::new();
    let ps: Vec<Skel> = premises.iter().map(|p| skeleton(p, &mut alphabet)).collect();
    let c = skeleton(conclusion, &mut alphabet);
    if alphabet.len() > MAX_ALPHABET {
        return Err(TautError::AlphabetTooLarge(alphabet.len()));
    }
    let n = alphabet.len() as u32;
    Ok((0..1u32 << n).all(|v| !ps.iter().all(|p| eval(p, v)) || eval(&c, v)))
}
