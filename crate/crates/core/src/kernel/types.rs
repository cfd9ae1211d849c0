use std::fmt;
use std::sync::Arc;

/// Simple types of the calculus.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Type {
    Nat,
    Bool,
    State,
    Arrow(Arc<Type>, Arc<Type>),
    Product(Arc<Type>, Arc<Type>),
    SeqOf(Arc<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Arc::new(a), Arc::new(b))
    }

    /// `a1 -> a2 -> ... -> result`
    pub fn arrows<I>(args: I, result: Type) -> Type
    where
        I: IntoIterator<Item = Type>,
        I::IntoIter: DoubleEndedIterator,
    {
        args.into_iter().rev().fold(result, |acc, a| Type::arrow(a, acc))
    }

    pub fn product(a: Type, b: Type) -> Type {
        Type::Product(Arc::new(a), Arc::new(b))
    }

    pub fn seq(a: Type) -> Type {
        Type::SeqOf(Arc::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Type::Nat | Type::Bool | Type::State)
    }

    pub fn split_arrow(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Arrow(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn split_product(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Argument types and final result of a curried arrow.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Arrow(a, b) = cur {
            args.push(a.as_ref());
            cur = b;
        }
        (args, cur)
    }

    /// Number of leading arrows.
    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    /// Type level: atomic types have level 0, `A -> B` has
    /// `max(level(A) + 1, level(B))`. With `flat_nat_seq`, `Nat*` counts as a
    /// coded natural number and has level 0.
    pub fn level(&self, flat_nat_seq: bool) -> usize {
        match self {
            Type::Nat | Type::Bool | Type::State => 0,
            Type::Arrow(a, b) => (a.level(flat_nat_seq) + 1).max(b.level(flat_nat_seq)),
            Type::Product(a, b) => a.level(flat_nat_seq).max(b.level(flat_nat_seq)),
            Type::SeqOf(a) => {
                if flat_nat_seq && **a == Type::Nat {
                    0
                } else {
                    a.level(flat_nat_seq) + 1
                }
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nat => write!(f, "Nat"),
            Type::Bool => write!(f, "Bool"),
            Type::State => write!(f, "State"),
            Type::Arrow(..) => {
                let (args, res) = self.uncurry();
                write!(f, "(->")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " {res})")
            }
            Type::Product(a, b) => write!(f, "(* {a} {b})"),
            Type::SeqOf(a) => write!(f, "(seq {a})"),
        }
    }
}
