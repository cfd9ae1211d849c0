use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use super::error::{KResult, KernelError};
use super::reduce::Machine;
use super::term::{Name, Term};
use super::types::Type;
use crate::states::{Atom, KnowledgeState};

/// Host implementation of a functional constant. It receives exactly
/// `arity` closed normal atomic arguments.
pub type RuleFn = Arc<dyn Fn(&mut Machine<'_>, &[Term]) -> KResult<Term> + Send + Sync>;

#[derive(Clone)]
pub enum ConstKind {
    /// Functional rule computed by the host.
    Rule(RuleFn),
    /// Defined by a closed term; applying it normalizes `body args`.
    Defined(Term),
    /// No rule: the constant is stuck (an oracle of the classical language).
    Opaque,
    /// Opaque oracle whose approximation at a state `s` is `approx s`.
    Oracle { approx: Name },
}

#[derive(Clone)]
pub struct ConstDef {
    pub name: Name,
    pub ty: Type,
    pub arity: usize,
    pub kind: ConstKind,
    /// Whether logical comparison may replace the constant by its body.
    pub unfold: bool,
    memo: Option<Arc<Mutex<HashMap<Vec<Term>, Term>>>>,
}

impl fmt::Debug for ConstDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ConstKind::Rule(_) => "rule".to_string(),
            ConstKind::Defined(b) => format!("defined {}", super::syntax::print_term(b)),
            ConstKind::Opaque => "opaque".to_string(),
            ConstKind::Oracle { approx } => format!("oracle ~ {approx}"),
        };
        write!(f, "{} : {} [{}]", self.name, self.ty, kind)
    }
}

impl ConstDef {
    pub fn body(&self) -> Option<&Term> {
        match &self.kind {
            ConstKind::Defined(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.kind, ConstKind::Oracle { .. })
    }

    pub fn has_rule(&self) -> bool {
        matches!(self.kind, ConstKind::Rule(_) | ConstKind::Defined(_))
    }

    pub(crate) fn memo_get(&self, args: &[Term]) -> Option<Term> {
        let memo = self.memo.as_ref()?;
        memo.lock().ok()?.get(args).cloned()
    }

    pub(crate) fn memo_put(&self, args: &[Term], value: &Term) {
        if let Some(memo) = &self.memo {
            if let Ok(mut m) = memo.lock() {
                if m.len() < 1 << 16 {
                    m.insert(args.to_vec(), value.clone());
                }
            }
        }
    }
}

/// A decidable predicate `P : Nat^k -> Nat -> Bool` of the language.
#[derive(Clone, Debug)]
pub struct PredicateSig {
    pub name: Name,
    /// Number of parameters; the witness argument is extra.
    pub arity: usize,
    pub body: Term,
}

/// Constants, their types and reduction rules, and the registered
/// predicates.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    consts: BTreeMap<Name, Arc<ConstDef>>,
    preds: BTreeMap<Name, PredicateSig>,
}

pub const CUP: &str = "cup";

fn nat_of(t: &Term, c: &str) -> KResult<u64> {
    t.as_num().ok_or_else(|| KernelError::RuleFailure {
        constant: c.into(),
        msg: "expected a numeral".into(),
    })
}

fn bool_of(t: &Term, c: &str) -> KResult<bool> {
    t.as_bool().ok_or_else(|| KernelError::RuleFailure {
        constant: c.into(),
        msg: "expected a boolean".into(),
    })
}

fn state_of<'a>(t: &'a Term, c: &str) -> KResult<&'a KnowledgeState> {
    t.as_state().ok_or_else(|| KernelError::RuleFailure {
        constant: c.into(),
        msg: "expected a state literal".into(),
    })
}

/// Largest numeral a rule may build; larger results are rule failures.
pub const MAX_NUMERAL: u64 = 1 << 20;

fn numeral(n: Option<u64>, c: &str) -> KResult<Term> {
    match n {
        Some(n) if n <= MAX_NUMERAL => Ok(Term::num(n)),
        _ => Err(KernelError::RuleFailure {
            constant: c.into(),
            msg: "numeral out of range".into(),
        }),
    }
}

/// Cantor pairing.
pub fn cantor_pair(a: u64, b: u64) -> Option<u64> {
    let s = a.checked_add(b)?;
    s.checked_mul(s.checked_add(1)?)?.checked_div(2)?.checked_add(b)
}

pub fn cantor_unpair(z: u64) -> (u64, u64) {
    let w = ((((8 * z as u128 + 1) as f64).sqrt() as u128 - 1) / 2) as u64;
    // Correct any floating point drift.
    let mut w = w;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let t = w * (w + 1) / 2;
    let b = z - t;
    (w - b, b)
}

impl Signature {
    /// A signature holding only the arithmetic and boolean prelude.
    pub fn prelude() -> Signature {
        let mut s = Signature::default();
        let nn_n = Type::arrows([Type::Nat, Type::Nat], Type::Nat);
        let nn_b = Type::arrows([Type::Nat, Type::Nat], Type::Bool);
        let bb_b = Type::arrows([Type::Bool, Type::Bool], Type::Bool);
        let arith: [(&str, fn(u64, u64) -> Option<u64>); 6] = [
            ("plus", |a, b| a.checked_add(b)),
            ("monus", |a, b| Some(a.saturating_sub(b))),
            ("times", |a, b| a.checked_mul(b)),
            ("max", |a, b| Some(a.max(b))),
            ("min", |a, b| Some(a.min(b))),
            ("pair", cantor_pair),
        ];
        for (name, op) in arith {
            s.add_rule(name, nn_n.clone(), move |_, a| {
                numeral(op(nat_of(&a[0], name)?, nat_of(&a[1], name)?), name)
            });
        }
        let cmp: [(&str, fn(u64, u64) -> bool); 3] =
            [("eq", |a, b| a == b), ("lt", |a, b| a < b), ("le", |a, b| a <= b)];
        for (name, op) in cmp {
            s.add_rule(name, nn_b.clone(), move |_, a| {
                Ok(Term::bool(op(nat_of(&a[0], name)?, nat_of(&a[1], name)?)))
            });
        }
        let conn: [(&str, fn(bool, bool) -> bool); 4] = [
            ("and", |a, b| a && b),
            ("or", |a, b| a || b),
            ("imp", |a, b| !a || b),
            ("iff", |a, b| a == b),
        ];
        for (name, op) in conn {
            s.add_rule(name, bb_b.clone(), move |_, a| {
                Ok(Term::bool(op(bool_of(&a[0], name)?, bool_of(&a[1], name)?)))
            });
        }
        s.add_rule("not", Type::arrow(Type::Bool, Type::Bool), |_, a| {
            Ok(Term::bool(!bool_of(&a[0], "not")?))
        });
        s.add_rule("pred", Type::arrow(Type::Nat, Type::Nat), |_, a| {
            Ok(Term::num(nat_of(&a[0], "pred")?.saturating_sub(1)))
        });
        s.add_rule("fst", Type::arrow(Type::Nat, Type::Nat), |_, a| {
            Ok(Term::num(cantor_unpair(nat_of(&a[0], "fst")?).0))
        });
        s.add_rule("snd", Type::arrow(Type::Nat, Type::Nat), |_, a| {
            Ok(Term::num(cantor_unpair(nat_of(&a[0], "snd")?).1))
        });
        s.add_rule(
            CUP,
            Type::arrows([Type::State, Type::State], Type::State),
            |_, a| Ok(Term::StateConst(state_of(&a[0], CUP)?.cup(state_of(&a[1], CUP)?))),
        );
        s
    }

    fn insert(&mut self, def: ConstDef) {
        self.consts.insert(def.name.clone(), Arc::new(def));
    }

    pub fn add_rule<F>(&mut self, name: &str, ty: Type, rule: F)
    where
        F: Fn(&mut Machine<'_>, &[Term]) -> KResult<Term> + Send + Sync + 'static,
    {
        let arity = ty.arity();
        self.insert(ConstDef {
            name: name.into(),
            ty,
            arity,
            kind: ConstKind::Rule(Arc::new(rule)),
            unfold: false,
            memo: None,
        });
    }

    /// Defines a first-order constant by a closed term. With `unfold`, the
    /// logic may replace the constant by its body when comparing formulas.
    pub fn add_defined(&mut self, name: &str, ty: Type, body: Term, unfold: bool) {
        let arity = ty.arity();
        self.insert(ConstDef {
            name: name.into(),
            ty,
            arity,
            kind: ConstKind::Defined(body),
            unfold,
            memo: Some(Arc::new(Mutex::new(HashMap::new()))),
        });
    }

    /// A function `Nat -> Nat` with finite support, as a chain of `if`s.
    pub fn add_table(&mut self, name: &str, values: &[u64]) {
        let x = Term::var("x", Type::Nat);
        let mut body = Term::Zero;
        for (i, v) in values.iter().enumerate().rev() {
            let test = Term::apps(
                Term::constant("eq", Type::arrows([Type::Nat, Type::Nat], Type::Bool)),
                [x.clone(), Term::num(i as u64)],
            );
            body = Term::ite(Type::Nat, test, Term::num(*v), body);
        }
        self.add_defined(name, Type::arrow(Type::Nat, Type::Nat), Term::lam("x", Type::Nat, body), false);
    }

    pub fn add_opaque(&mut self, name: &str, ty: Type) {
        let arity = ty.arity();
        self.insert(ConstDef {
            name: name.into(),
            ty,
            arity,
            kind: ConstKind::Opaque,
            unfold: false,
            memo: None,
        });
    }

    /// An oracle constant together with the name of its approximation,
    /// which must have type `State -> ty`.
    pub fn add_oracle(&mut self, name: &str, ty: Type, approx: &str) {
        let arity = ty.arity();
        self.insert(ConstDef {
            name: name.into(),
            ty,
            arity,
            kind: ConstKind::Oracle { approx: approx.into() },
            unfold: false,
            memo: None,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Arc<ConstDef>> {
        self.consts.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.consts.contains_key(name)
    }

    pub fn const_term(&self, name: &str) -> KResult<Term> {
        let d = self.get(name).ok_or_else(|| KernelError::UnknownConstant(name.into()))?;
        Ok(Term::Const(d.name.clone(), d.ty.clone()))
    }

    pub fn constants(&self) -> impl Iterator<Item = &Arc<ConstDef>> {
        self.consts.values()
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSig> {
        self.preds.get(name)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredicateSig> {
        self.preds.values()
    }

    /// Registers `P` with `arity` parameters. Alongside `P` this defines the
    /// learning constants `chi.P`, `phi.P`, `add.P` and the oracles `Chi.P`,
    /// `Phi.P`, `Add.P`.
    pub fn add_predicate(&mut self, name: &str, arity: usize, body: Term) -> KResult<()> {
        if self.contains(name) {
            return Err(KernelError::DuplicateConstant(name.into()));
        }
        let pty = Type::arrows(vec![Type::Nat; arity + 1], Type::Bool);
        self.add_defined(name, pty, body.clone(), true);
        self.preds.insert(
            name.into(),
            PredicateSig { name: name.into(), arity, body },
        );
        let params = vec![Type::Nat; arity];
        let chi_ty = Type::arrows(params.clone(), Type::Bool);
        let phi_ty = Type::arrows(params.clone(), Type::Nat);
        let mut add_params = params.clone();
        add_params.push(Type::Nat);
        let add_ty = Type::arrows(add_params, Type::State);
        let with_state = |t: &Type| Type::arrow(Type::State, t.clone());

        let p: Name = name.into();
        let n1 = format!("chi.{name}");
        let p1 = p.clone();
        self.add_rule(&n1, with_state(&chi_ty), move |_, a| {
            let s = state_of(&a[0], "chi")?;
            let args = nats(&a[1..], "chi")?;
            Ok(Term::bool(s.lookup(&p1, &args).is_some()))
        });
        let n2 = format!("phi.{name}");
        let p2 = p.clone();
        self.add_rule(&n2, with_state(&phi_ty), move |_, a| {
            let s = state_of(&a[0], "phi")?;
            let args = nats(&a[1..], "phi")?;
            Ok(Term::num(s.lookup(&p2, &args).unwrap_or(0)))
        });
        let n3 = format!("add.{name}");
        let p3 = p.clone();
        self.add_rule(&n3, with_state(&add_ty), move |m, a| {
            let s = state_of(&a[0], "add")?;
            let mut args = nats(&a[1..], "add")?;
            let w = args.pop().expect("add has a witness argument");
            if s.lookup(&p3, &args).is_some() || !m.eval_predicate(&p3, &args, w)? {
                return Ok(Term::empty_state());
            }
            Ok(Term::StateConst(KnowledgeState::singleton(Atom::new_unchecked(
                p3.clone(),
                args,
                w,
            ))))
        });
        self.add_oracle(&format!("Chi.{name}"), chi_ty, &n1);
        self.add_oracle(&format!("Phi.{name}"), phi_ty, &n2);
        self.add_oracle(&format!("Add.{name}"), add_ty, &n3);
        Ok(())
    }

    /// A checked atom: the predicate must hold at `(args, witness)`.
    pub fn atom(&self, pred: &str, args: &[u64], witness: u64) -> KResult<Atom> {
        let p = self.predicate(pred).ok_or_else(|| KernelError::NotAPredicate(pred.into()))?;
        if p.arity != args.len() {
            return Err(KernelError::MalformedApplication(format!(
                "{pred} expects {} parameters, got {}",
                p.arity,
                args.len()
            )));
        }
        let mut m = Machine::new(self, super::DEFAULT_FUEL);
        if m.eval_predicate(pred, args, witness)? {
            Ok(Atom::new_unchecked(p.name.clone(), args.to_vec(), witness))
        } else {
            Err(KernelError::FalseAtom(
                Atom::new_unchecked(pred.into(), args.to_vec(), witness).to_string(),
            ))
        }
    }

    /// A checked knowledge state.
    pub fn state<I>(&self, atoms: I) -> KResult<KnowledgeState>
    where
        I: IntoIterator<Item = (String, Vec<u64>, u64)>,
    {
        let mut s = KnowledgeState::empty();
        for (p, args, w) in atoms {
            let a = self.atom(&p, &args, w)?;
            let shown = a.to_string();
            s = s
                .with_atom(a)
                .ok_or(KernelError::InconsistentState(shown))?;
        }
        Ok(s)
    }
}

fn nats(ts: &[Term], c: &str) -> KResult<Vec<u64>> {
    ts.iter().map(|t| nat_of(t, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_pairing_inverts() {
        for a in 0..40 {
            for b in 0..40 {
                let z = cantor_pair(a, b).unwrap();
                assert_eq!(cantor_unpair(z), (a, b));
            }
        }
    }

    #[test]
    fn prelude_has_connectives() {
        let s = Signature::prelude();
        for c in ["plus", "monus", "eq", "lt", "le", "and", "or", "not", "imp", "cup"] {
            assert!(s.contains(c), "{c}");
        }
    }

    #[test]
    fn checked_atoms() {
        let mut s = Signature::prelude();
        let body = crate::kernel::parse_term(&s, "(lam (x Nat) (y Nat) (eq x (times y y)))").unwrap();
        s.add_predicate("P", 1, body).unwrap();
        assert!(s.atom("P", &[4], 2).is_ok());
        assert!(matches!(s.atom("P", &[4], 3), Err(KernelError::FalseAtom(_))));
        assert!(s.contains("Chi.P") && s.contains("add.P"));
    }
}
