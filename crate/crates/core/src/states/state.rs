use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kernel::Name;

/// A piece of learned knowledge: `P(args, witness)` holds.
///
/// Atoms are only produced through [`crate::kernel::Signature::atom`] or by
/// the `add` learning rules, both of which evaluate the predicate first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<u64>,
    pub witness: u64,
}

impl Atom {
    pub(crate) fn new_unchecked(pred: Name, args: Vec<u64>, witness: u64) -> Atom {
        Atom { pred, args, witness }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, " {})", self.witness)
    }
}

/// A consistent finite set of atoms: at most one witness per `(P, args)`.
///
/// Stored as a sorted map so that equality, hashing and printing are
/// canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct KnowledgeState {
    atoms: Arc<BTreeMap<(Name, Vec<u64>), u64>>,
}

impl KnowledgeState {
    pub fn empty() -> KnowledgeState {
        KnowledgeState::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.atoms
            .iter()
            .map(|((p, args), w)| Atom::new_unchecked(p.clone(), args.clone(), *w))
    }

    pub fn lookup(&self, pred: &str, args: &[u64]) -> Option<u64> {
        // BTreeMap keyed by (Name, Vec) needs an owned key for lookup.
        self.atoms.get(&(Name::from(pred), args.to_vec())).copied()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.lookup(&atom.pred, &atom.args) == Some(atom.witness)
    }

    /// Adds an atom; `None` when the state already has a different witness
    /// for the same `(P, args)`.
    pub fn with_atom(&self, atom: Atom) -> Option<KnowledgeState> {
        match self.lookup(&atom.pred, &atom.args) {
            Some(w) if w == atom.witness => Some(self.clone()),
            Some(_) => None,
            None => {
                let mut m = (*self.atoms).clone();
                m.insert((atom.pred, atom.args), atom.witness);
                Some(KnowledgeState { atoms: Arc::new(m) })
            }
        }
    }

    pub(crate) fn singleton(atom: Atom) -> KnowledgeState {
        KnowledgeState::empty().with_atom(atom).expect("empty state accepts any atom")
    }

    /// Consistent union: atoms of `self`, then atoms of `other` whose
    /// `(P, args)` is not already decided by `self`.
    pub fn cup(&self, other: &KnowledgeState) -> KnowledgeState {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut m = (*self.atoms).clone();
        for (k, w) in other.atoms.iter() {
            m.entry(k.clone()).or_insert(*w);
        }
        KnowledgeState { atoms: Arc::new(m) }
    }

    pub fn leq(&self, other: &KnowledgeState) -> bool {
        self.atoms
            .iter()
            .all(|(k, w)| other.atoms.get(k) == Some(w))
    }

    /// True when no `(P, args)` receives two different witnesses.
    pub fn consistent_with(&self, other: &KnowledgeState) -> bool {
        self.atoms
            .iter()
            .all(|(k, w)| other.atoms.get(k).is_none_or(|v| v == w))
    }

    pub fn from_atoms_unchecked<I: IntoIterator<Item = Atom>>(atoms: I) -> Option<KnowledgeState> {
        let mut s = KnowledgeState::empty();
        for a in atoms {
            s = s.with_atom(a)?;
        }
        Some(s)
    }
}

impl fmt::Display for KnowledgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for KnowledgeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let atoms: Vec<Atom> = self.atoms().collect();
        atoms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for KnowledgeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let atoms = Vec::<Atom>::deserialize(d)?;
        KnowledgeState::from_atoms_unchecked(atoms)
            .ok_or_else(|| serde::de::Error::custom("inconsistent knowledge state"))
    }
}
