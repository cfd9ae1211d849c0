use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

/// A level below some ordinal.
///
/// Codes from different variants are never compared in practice, since a
/// procedure lives in one [`Ordinal`], but the derived order is still total.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrdCode {
    /// `i < k` for a finite ordinal `k`.
    Fin(u64),
    /// A point of `ω^k` as a `k`-tuple, ordered lexicographically.
    Vec(Vec<u64>),
    /// `ω·j + n` with `j ∈ {0, 1}`, a point of `ω·2`.
    OmegaPlus(u8, u64),
}

impl fmt::Display for OrdCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdCode::Fin(i) => write!(f, "{i}"),
            OrdCode::Vec(xs) => {
                write!(f, "<")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ">")
            }
            OrdCode::OmegaPlus(0, n) => write!(f, "{n}"),
            OrdCode::OmegaPlus(_, 0) => write!(f, "w"),
            OrdCode::OmegaPlus(_, n) => write!(f, "w+{n}"),
        }
    }
}

impl Serialize for OrdCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The ordinals update procedures are indexed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Ordinal {
    /// A finite ordinal `k ≥ 1`.
    Fin(u64),
    /// `ω^k`; `ω^0 = 1` has the single level `<>`.
    OmegaPow(u32),
    OmegaTimes2,
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ordinal::Fin(k) => write!(f, "{k}"),
            Ordinal::OmegaPow(0) => write!(f, "w^0"),
            Ordinal::OmegaPow(1) => write!(f, "w"),
            Ordinal::OmegaPow(k) => write!(f, "w^{k}"),
            Ordinal::OmegaTimes2 => write!(f, "w*2"),
        }
    }
}

impl Ordinal {
    pub fn contains(&self, c: &OrdCode) -> bool {
        match (self, c) {
            (Ordinal::Fin(k), OrdCode::Fin(i)) => i < k,
            (Ordinal::OmegaPow(k), OrdCode::Vec(xs)) => xs.len() == *k as usize,
            (Ordinal::OmegaTimes2, OrdCode::OmegaPlus(j, _)) => *j < 2,
            _ => false,
        }
    }

    /// The least level.
    pub fn bottom(&self) -> OrdCode {
        match self {
            Ordinal::Fin(_) => OrdCode::Fin(0),
            Ordinal::OmegaPow(k) => OrdCode::Vec(vec![0; *k as usize]),
            Ordinal::OmegaTimes2 => OrdCode::OmegaPlus(0, 0),
        }
    }

    /// The exponent `k` of the least `ω^k` this ordinal embeds into, as
    /// an initial segment.
    pub fn exponent(&self) -> u32 {
        match self {
            Ordinal::Fin(1) => 0,
            Ordinal::Fin(_) => 1,
            Ordinal::OmegaPow(k) => *k,
            Ordinal::OmegaTimes2 => 2,
        }
    }

    /// The order-preserving embedding into `ω^{exponent}`.
    pub fn embed(&self, c: &OrdCode) -> Option<Vec<u64>> {
        if !self.contains(c) {
            return None;
        }
        Some(match (self.exponent(), c) {
            (0, _) => Vec::new(),
            (_, OrdCode::Fin(i)) => vec![*i],
            (_, OrdCode::Vec(xs)) => xs.clone(),
            (_, OrdCode::OmegaPlus(j, n)) => vec![u64::from(*j), *n],
        })
    }

    /// Inverse of [`Ordinal::embed`].
    pub fn project(&self, xs: &[u64]) -> Option<OrdCode> {
        let c = match self {
            Ordinal::Fin(1) if xs.is_empty() => OrdCode::Fin(0),
            Ordinal::Fin(_) => match xs {
                [i] => OrdCode::Fin(*i),
                _ => return None,
            },
            Ordinal::OmegaPow(_) => OrdCode::Vec(xs.to_vec()),
            Ordinal::OmegaTimes2 => match xs {
                [j, n] if *j < 2 => OrdCode::OmegaPlus(*j as u8, *n),
                _ => return None,
            },
        };
        self.contains(&c).then_some(c)
    }

    /// A random level with small coordinates.
    pub fn sample<R: Rng>(&self, rng: &mut R, width: u64) -> OrdCode {
        match self {
            Ordinal::Fin(k) => OrdCode::Fin(rng.gen_range(0..*k)),
            Ordinal::OmegaPow(k) => OrdCode::Vec((0..*k).map(|_| rng.gen_range(0..width)).collect()),
            Ordinal::OmegaTimes2 => OrdCode::OmegaPlus(rng.gen_range(0..2), rng.gen_range(0..width)),
        }
    }
}

/// The output of an update procedure: `⟨β, n, m⟩` asks that the function
/// at level `β` be changed to return `m` at `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Update {
    Empty,
    Learn { level: OrdCode, arg: u64, value: u64 },
}

impl Update {
    pub fn learn(level: OrdCode, arg: u64, value: u64) -> Update {
        Update::Learn { level, arg, value }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Update::Empty)
    }

    pub fn level(&self) -> Option<&OrdCode> {
        match self {
            Update::Empty => None,
            Update::Learn { level, .. } => Some(level),
        }
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::Empty => write!(f, "∅"),
            Update::Learn { level, arg, value } => write!(f, "<{level}, {arg}, {value}>"),
        }
    }
}

/// A finite function `α → (Nat → Nat)`: a sparse map from `(level, n)` to
/// nonzero values, zero everywhere else.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Family {
    values: BTreeMap<(OrdCode, u64), u64>,
}

impl Family {
    pub fn zero() -> Family {
        Family::default()
    }

    pub fn get(&self, level: &OrdCode, n: u64) -> u64 {
        self.values.get(&(level.clone(), n)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, level: OrdCode, n: u64, m: u64) {
        if m == 0 {
            self.values.remove(&(level, n));
        } else {
            self.values.insert((level, n), m);
        }
    }

    pub fn with(mut self, level: OrdCode, n: u64, m: u64) -> Family {
        self.set(level, n, m);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The nonzero points, ordered by level and argument.
    pub fn iter(&self) -> impl Iterator<Item = (&OrdCode, u64, u64)> {
        self.values.iter().map(|((l, n), m)| (l, *n, *m))
    }

    /// The nonzero points of one level.
    pub fn level(&self, level: &OrdCode) -> BTreeMap<u64, u64> {
        self.iter().filter(|(l, _, _)| *l == level).map(|(_, n, m)| (n, m)).collect()
    }

    /// The levels with a nonzero point.
    pub fn levels(&self) -> Vec<OrdCode> {
        let mut out: Vec<OrdCode> = self.values.keys().map(|(l, _)| l.clone()).collect();
        out.dedup();
        out
    }

    /// `f_γ = g_γ` for every `γ < β`.
    pub fn agrees_below(&self, other: &Family, beta: &OrdCode) -> bool {
        let below = |f: &Family| -> Vec<(OrdCode, u64, u64)> {
            f.iter().filter(|(l, _, _)| *l < beta).map(|(l, n, m)| (l.clone(), n, m)).collect()
        };
        below(self) == below(other)
    }

    /// `self ≤ other`: every nonzero value of `self` is kept by `other`.
    pub fn le(&self, other: &Family) -> bool {
        self.iter().all(|(l, n, m)| other.get(l, n) == m)
    }

    pub fn retain<F: FnMut(&OrdCode, u64) -> bool>(&mut self, mut keep: F) {
        self.values.retain(|(l, n), _| keep(l, *n));
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (l, n, m)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}:{n}↦{m}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Point<'a> {
            level: &'a OrdCode,
            arg: u64,
            value: u64,
        }
        s.collect_seq(self.iter().map(|(level, arg, value)| Point { level, arg, value }))
    }
}

/// Whether a chain of families is weakly increasing: nonzero values
/// persist along it.
pub fn weakly_increasing(chain: &[Family]) -> bool {
    chain.windows(2).all(|w| w[0].le(&w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let v = |xs: &[u64]| OrdCode::Vec(xs.to_vec());
        assert!(v(&[0, 9]) < v(&[1, 0]));
        assert!(v(&[1, 0]) < v(&[1, 1]));
        assert!(OrdCode::OmegaPlus(0, 100) < OrdCode::OmegaPlus(1, 0));
    }

    #[test]
    fn embedding_round_trips() {
        for (o, c) in [
            (Ordinal::Fin(1), OrdCode::Fin(0)),
            (Ordinal::Fin(3), OrdCode::Fin(2)),
            (Ordinal::OmegaPow(2), OrdCode::Vec(vec![1, 4])),
            (Ordinal::OmegaTimes2, OrdCode::OmegaPlus(1, 3)),
        ] {
            let e = o.embed(&c).unwrap();
            assert_eq!(e.len() as u32, o.exponent());
            assert_eq!(o.project(&e), Some(c));
        }
        assert_eq!(Ordinal::Fin(3).embed(&OrdCode::Fin(3)), None);
    }

    #[test]
    fn zero_values_are_not_stored() {
        let f = Family::zero().with(OrdCode::Fin(0), 3, 5).with(OrdCode::Fin(0), 3, 0);
        assert!(f.is_zero());
    }
}
