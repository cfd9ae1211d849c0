use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use indexmap::IndexSet;
use serde::{Serialize, Serializer};

use crate::kernel::{is_name, normalize_with_fuel, Name, Signature, Term, DEFAULT_FUEL};
use crate::logic::{Document, Overrides};
use crate::sexp::{self, Sexp};

use super::ordinal::{Family, OrdCode, Ordinal, Update};
use super::procedure::{learning_process, LearningRun, Mode, UpdateProcedure};
use super::{UResult, UpdateError};

/// Terms and formulas of the first-order epsilon calculus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Eps {
    Num(u64),
    Succ(Box<Eps>),
    Var(Name),
    /// `ε x A`
    Choice(Name, Box<Eps>),
    /// A decidable predicate, read from the kernel signature; `=` is `eq`.
    Pred(Name, Vec<Eps>),
    Not(Box<Eps>),
    And(Box<Eps>, Box<Eps>),
    Imp(Box<Eps>, Box<Eps>),
}

impl Eps {
    pub fn var(x: &str) -> Eps {
        Eps::Var(x.into())
    }

    pub fn choice(x: &str, body: Eps) -> Eps {
        Eps::Choice(x.into(), Box::new(body))
    }

    pub fn pred<I: IntoIterator<Item = Eps>>(p: &str, args: I) -> Eps {
        Eps::Pred(p.into(), args.into_iter().collect())
    }

    pub fn eq(a: Eps, b: Eps) -> Eps {
        Eps::pred("=", [a, b])
    }

    pub fn succ(t: Eps) -> Eps {
        Eps::Succ(Box::new(t))
    }

    pub fn not(a: Eps) -> Eps {
        Eps::Not(Box::new(a))
    }

    pub fn and(a: Eps, b: Eps) -> Eps {
        Eps::And(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Eps, b: Eps) -> Eps {
        Eps::Imp(Box::new(a), Box::new(b))
    }

    pub fn is_term(&self) -> bool {
        matches!(self, Eps::Num(_) | Eps::Succ(_) | Eps::Var(_) | Eps::Choice(..))
    }

    /// Terms in term positions and formulas in formula positions.
    pub fn well_formed(&self) -> bool {
        match self {
            Eps::Num(_) | Eps::Var(_) => true,
            Eps::Succ(t) => t.is_term() && t.well_formed(),
            Eps::Choice(_, a) | Eps::Not(a) => !a.is_term() && a.well_formed(),
            Eps::Pred(_, ts) => ts.iter().all(|t| t.is_term() && t.well_formed()),
            Eps::And(a, b) | Eps::Imp(a, b) => !a.is_term() && !b.is_term() && a.well_formed() && b.well_formed(),
        }
    }

    fn children(&self) -> Vec<&Eps> {
        match self {
            Eps::Num(_) | Eps::Var(_) => Vec::new(),
            Eps::Succ(a) | Eps::Choice(_, a) | Eps::Not(a) => vec![a],
            Eps::Pred(_, ts) => ts.iter().collect(),
            Eps::And(a, b) | Eps::Imp(a, b) => vec![a, b],
        }
    }

    fn map_children(&self, f: &mut dyn FnMut(&Eps) -> Eps) -> Eps {
        match self {
            Eps::Num(_) | Eps::Var(_) => self.clone(),
            Eps::Succ(a) => Eps::Succ(Box::new(f(a))),
            Eps::Choice(x, a) => Eps::Choice(x.clone(), Box::new(f(a))),
            Eps::Not(a) => Eps::Not(Box::new(f(a))),
            Eps::Pred(p, ts) => Eps::Pred(p.clone(), ts.iter().map(f).collect()),
            Eps::And(a, b) => Eps::And(Box::new(f(a)), Box::new(f(b))),
            Eps::Imp(a, b) => Eps::Imp(Box::new(f(a)), Box::new(f(b))),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Eps::Var(x) if !bound.contains(x) => {
                out.insert(x.clone());
            }
            Eps::Choice(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
            _ => self.children().into_iter().for_each(|c| c.collect_free(bound, out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// `A(t/x)` for a closed `t`.
    pub fn subst(&self, x: &str, t: &Eps) -> Eps {
        match self {
            Eps::Var(y) if &**y == x => t.clone(),
            Eps::Choice(y, _) if &**y == x => self.clone(),
            _ => self.map_children(&mut |c| c.subst(x, t)),
        }
    }

    /// ε-nesting depth; for canonical ε-terms this is the rank.
    pub fn rank(&self) -> usize {
        let inner = self.children().into_iter().map(Eps::rank).max().unwrap_or(0);
        match self {
            Eps::Choice(..) => inner + 1,
            _ => inner,
        }
    }

    /// Closed ε-terms without closed ε-terms as proper subterms.
    pub fn is_canonical(&self) -> bool {
        fn has_closed_choice(e: &Eps) -> bool {
            e.children().into_iter().any(|c| (matches!(c, Eps::Choice(..)) && c.is_closed()) || has_closed_choice(c))
        }
        matches!(self, Eps::Choice(..)) && self.is_closed() && !has_closed_choice(self)
    }

    /// The representative of the α-class: bound variables renamed by
    /// depth and numerals folded.
    pub fn canonical(&self) -> Eps {
        fn go(e: &Eps, env: &mut Vec<(Name, Name)>) -> Eps {
            match e {
                Eps::Var(x) => match env.iter().rev().find(|(a, _)| a == x) {
                    Some((_, b)) => Eps::Var(b.clone()),
                    None => e.clone(),
                },
                Eps::Choice(x, a) => {
                    let b: Name = format!("_{}", env.len()).into();
                    env.push((x.clone(), b.clone()));
                    let body = go(a, env);
                    env.pop();
                    Eps::Choice(b, Box::new(body))
                }
                Eps::Succ(a) => match go(a, env) {
                    Eps::Num(n) => Eps::Num(n + 1),
                    t => Eps::Succ(Box::new(t)),
                },
                _ => e.map_children(&mut |c| go(c, env)),
            }
        }
        go(self, &mut Vec::new())
    }

    /// Every ε-subterm, outermost first.
    pub fn choices(&self) -> Vec<&Eps> {
        let mut out = Vec::new();
        if matches!(self, Eps::Choice(..)) {
            out.push(self);
        }
        for c in self.children() {
            out.extend(c.choices());
        }
        out
    }

    /// Matches `self` against `target`, treating free `x` as a pattern
    /// variable bound to one closed term.
    fn matches(&self, x: &str, target: &Eps, bound: &mut Option<Eps>) -> bool {
        match (self, target) {
            (Eps::Var(y), t) if &**y == x => match bound {
                Some(b) => b.canonical() == t.canonical(),
                None => {
                    *bound = Some(t.clone());
                    true
                }
            },
            (Eps::Choice(y, a), Eps::Choice(z, b)) if y == z => {
                if &**y == x {
                    a == b
                } else {
                    a.matches(x, b, bound)
                }
            }
            (Eps::Pred(p, ts), Eps::Pred(q, us)) => {
                p == q && ts.len() == us.len() && ts.iter().zip(us).all(|(t, u)| t.matches(x, u, bound))
            }
            (Eps::Succ(a), Eps::Succ(b)) | (Eps::Not(a), Eps::Not(b)) => a.matches(x, b, bound),
            (Eps::And(a1, b1), Eps::And(a2, b2)) | (Eps::Imp(a1, b1), Eps::Imp(a2, b2)) => {
                a1.matches(x, a2, bound) && b1.matches(x, b2, bound)
            }
            (a, b) => a == b,
        }
    }

    pub fn from_sexp(s: &Sexp) -> UResult<Eps> {
        let bad = |msg: &str| UpdateError::Syntax(s.err(msg).to_string());
        if let Some(a) = s.atom() {
            if let Ok(n) = a.parse::<u64>() {
                return Ok(Eps::Num(n));
            }
            if is_name(a) {
                return Ok(Eps::var(a));
            }
            return Err(bad("expression expected"));
        }
        let xs = s.list().ok_or_else(|| bad("expression expected"))?;
        let head = s.head().ok_or_else(|| bad("operator expected"))?;
        let args = xs[1..].iter().map(Eps::from_sexp);
        let e = match (head, xs.len()) {
            ("S", 2) => Eps::succ(Eps::from_sexp(&xs[1])?),
            ("eps", 3) => {
                let x = xs[1].atom().filter(|a| is_name(a)).ok_or_else(|| bad("bound variable expected"))?;
                Eps::choice(x, Eps::from_sexp(&xs[2])?)
            }
            ("not", 2) => Eps::not(Eps::from_sexp(&xs[1])?),
            ("and", 3) => Eps::and(Eps::from_sexp(&xs[1])?, Eps::from_sexp(&xs[2])?),
            ("->", 3) => Eps::imp(Eps::from_sexp(&xs[1])?, Eps::from_sexp(&xs[2])?),
            ("S" | "eps" | "not" | "and" | "->", _) => return Err(bad(&format!("wrong number of arguments to `{head}`"))),
            (p, _) if p == "=" || is_name(p) => Eps::Pred(p.into(), args.collect::<UResult<_>>()?),
            _ => return Err(bad("operator expected")),
        };
        if !e.well_formed() {
            return Err(bad("terms and formulas are mixed up"));
        }
        Ok(e)
    }

    pub fn parse(src: &str) -> UResult<Eps> {
        let s = sexp::read_one(src).map_err(|e| UpdateError::Syntax(e.to_string()))?;
        Eps::from_sexp(&s)
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eps::Num(n) => write!(f, "{n}"),
            Eps::Succ(a) => write!(f, "(S {a})"),
            Eps::Var(x) => write!(f, "{x}"),
            Eps::Choice(x, a) => write!(f, "(eps {x} {a})"),
            Eps::Pred(p, ts) => {
                write!(f, "({p}")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Eps::Not(a) => write!(f, "(not {a})"),
            Eps::And(a, b) => write!(f, "(and {a} {b})"),
            Eps::Imp(a, b) => write!(f, "(-> {a} {b})"),
        }
    }
}

impl Serialize for Eps {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite map from canonical ε-terms to numerals, `0` elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EpsSubstitution {
    map: BTreeMap<Eps, u64>,
}

impl EpsSubstitution {
    pub fn new() -> EpsSubstitution {
        EpsSubstitution::default()
    }

    pub fn insert(&mut self, e: &Eps, v: u64) -> UResult<()> {
        if !e.is_canonical() {
            return Err(UpdateError::NotCanonical(e.to_string()));
        }
        let k = e.canonical();
        if v == 0 {
            self.map.remove(&k);
        } else {
            self.map.insert(k, v);
        }
        Ok(())
    }

    pub fn with(mut self, e: &Eps, v: u64) -> UResult<EpsSubstitution> {
        self.insert(e, v)?;
        Ok(self)
    }

    pub fn get(&self, e: &Eps) -> u64 {
        self.map.get(&e.canonical()).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Eps, u64)> {
        self.map.iter().map(|(e, v)| (e, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl fmt::Display for EpsSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e} ↦ {v}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for EpsSubstitution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.iter().map(|(e, v)| (e.to_string(), v)))
    }
}

/// `|e|_S`: every canonical ε-subterm replaced by its value, innermost
/// first. Each replacement costs one unit of `fuel`.
pub fn eps_normalize(e: &Eps, s: &EpsSubstitution, fuel: u64) -> UResult<Eps> {
    normalize_by(e, &mut |c| Ok(s.get(c)), fuel)
}

fn normalize_by(e: &Eps, value: &mut dyn FnMut(&Eps) -> UResult<u64>, fuel: u64) -> UResult<Eps> {
    fn go(e: &Eps, value: &mut dyn FnMut(&Eps) -> UResult<u64>, fuel: &mut u64, limit: u64) -> UResult<Eps> {
        let mut err = None;
        let out = e.map_children(&mut |c| match go(c, value, fuel, limit) {
            Ok(t) => t,
            Err(x) => {
                err.get_or_insert(x);
                c.clone()
            }
        });
        if let Some(x) = err {
            return Err(x);
        }
        if matches!(out, Eps::Choice(..)) && out.is_closed() {
            if *fuel == 0 {
                return Err(UpdateError::FuelExhausted { limit });
            }
            *fuel -= 1;
            return Ok(Eps::Num(value(&out)?));
        }
        Ok(out)
    }
    let mut f = fuel;
    go(e, value, &mut f, fuel)
}

/// Interprets closed ε-free expressions; predicates come from a kernel
/// signature.
#[derive(Clone, Debug)]
pub struct EpsContext {
    pub sig: Signature,
}

impl Default for EpsContext {
    fn default() -> Self {
        EpsContext { sig: Document::default().sig }
    }
}

impl EpsContext {
    pub fn term_value(&self, t: &Eps) -> UResult<u64> {
        match t {
            Eps::Num(n) => Ok(*n),
            Eps::Succ(a) => Ok(self.term_value(a)? + 1),
            _ => Err(UpdateError::NotEvaluable(t.to_string())),
        }
    }

    pub fn truth(&self, a: &Eps) -> UResult<bool> {
        match a {
            Eps::Not(a) => Ok(!self.truth(a)?),
            Eps::And(a, b) => Ok(self.truth(a)? && self.truth(b)?),
            Eps::Imp(a, b) => Ok(!self.truth(a)? || self.truth(b)?),
            Eps::Pred(p, ts) => {
                let name = if &**p == "=" { "eq" } else { p };
                let args = ts.iter().map(|t| self.term_value(t).map(Term::num)).collect::<UResult<Vec<_>>>()?;
                let t = Term::apps(self.sig.const_term(name)?, args);
                let (nf, _) = normalize_with_fuel(&self.sig, &t, DEFAULT_FUEL)?;
                nf.as_bool().ok_or_else(|| UpdateError::NotEvaluable(a.to_string()))
            }
            _ => Err(UpdateError::NotEvaluable(a.to_string())),
        }
    }

    /// The truth value of a closed formula under `s`.
    pub fn holds(&self, a: &Eps, s: &EpsSubstitution) -> UResult<bool> {
        self.truth(&eps_normalize(a, s, DEFAULT_FUEL)?)
    }
}

/// A critical formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Critical {
    /// `A(t/x) → A(εxA/x)`
    Witness { var: Name, body: Eps, t: Eps },
    /// `¬ s = 0 → s = S(εx. s = S x)`
    Pred { s: Eps },
}

fn pred_body(s: &Eps, x: &str) -> Eps {
    Eps::eq(s.clone(), Eps::succ(Eps::var(x)))
}

impl Critical {
    pub fn formula(&self) -> Eps {
        match self {
            Critical::Witness { var, body, t } => {
                let e = Eps::Choice(var.clone(), Box::new(body.clone()));
                Eps::imp(body.subst(var, t), body.subst(var, &e))
            }
            Critical::Pred { s } => Eps::imp(
                Eps::not(Eps::eq(s.clone(), Eps::Num(0))),
                Eps::eq(s.clone(), Eps::succ(Eps::choice("x", pred_body(s, "x")))),
            ),
        }
    }

    /// Reads a closed formula as a critical formula.
    pub fn recognize(f: &Eps) -> UResult<Critical> {
        let bad = |why: &str| UpdateError::MalformedCritical(format!("{f}: {why}"));
        if !f.well_formed() || f.is_term() {
            return Err(bad("not a formula"));
        }
        if !f.is_closed() {
            return Err(bad("not closed"));
        }
        let Eps::Imp(l, r) = f else { return Err(bad("not an implication")) };
        if let (Eps::Not(n), Eps::Pred(eq, rs)) = (&**l, &**r) {
            if let (Eps::Pred(eq0, ls), [s2, Eps::Succ(c)]) = (&**n, rs.as_slice()) {
                if &**eq0 == "=" && &**eq == "=" && ls.len() == 2 && ls[1].canonical() == Eps::Num(0) {
                    if let Eps::Choice(x, body) = &**c {
                        let s = &ls[0];
                        if s == s2 && **body == pred_body(s, x) {
                            return Ok(Critical::Pred { s: s.clone() });
                        }
                    }
                }
            }
        }
        for c in r.choices() {
            let Eps::Choice(x, a) = c else { continue };
            if a.subst(x, c).canonical() != r.canonical() {
                continue;
            }
            let mut t = None;
            if a.matches(x, l, &mut t) {
                let t = t.unwrap_or(Eps::Num(0));
                return Ok(Critical::Witness { var: x.clone(), body: (**a).clone(), t });
            }
        }
        Err(bad("expected A(t) -> A(eps x A) or (not s = 0) -> s = S(eps x s = S x)"))
    }
}

impl fmt::Display for Critical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}

/// Levels and indices of canonical ε-terms, assigned on first appearance.
#[derive(Debug, Default)]
struct Registry {
    levels: BTreeMap<u64, IndexSet<Eps>>,
}

impl Registry {
    fn index(&mut self, e: &Eps) -> (u64, u64) {
        let level = e.rank().saturating_sub(1) as u64;
        let (i, _) = self.levels.entry(level).or_default().insert_full(e.canonical());
        (level, i as u64)
    }

    fn position(e: (u64, u64)) -> OrdCode {
        OrdCode::Vec(vec![e.0])
    }
}

/// A list of critical formulas together with the enumeration of the
/// ε-terms met while evaluating them.
///
/// The level of a canonical ε-term is its ε-nesting depth minus one and
/// its index is the order in which it was first met on that level. A
/// family `f` over `ω` stands for the substitution `S_f(e) = f_level(index)`.
#[derive(Debug)]
pub struct CriticalSet {
    pub ctx: EpsContext,
    pub criticals: Vec<Critical>,
    registry: Mutex<Registry>,
}

/// Result of [`CriticalSet::h_process`].
#[derive(Clone, Debug, Serialize)]
pub struct HProcess {
    pub substitution: EpsSubstitution,
    pub run: LearningRun,
}

impl CriticalSet {
    pub fn new(ctx: EpsContext, formulas: &[Eps]) -> UResult<CriticalSet> {
        let criticals = formulas.iter().map(Critical::recognize).collect::<UResult<_>>()?;
        Ok(CriticalSet { ctx, criticals, registry: Mutex::default() })
    }

    /// Reads a file of kernel declarations (`fun`, `table`, `inline`) and
    /// `(critical FORMULA)` entries.
    pub fn parse(src: &str) -> UResult<CriticalSet> {
        let mut doc = Document::default();
        let mut formulas = Vec::new();
        for d in sexp::read_all(src).map_err(|e| UpdateError::Syntax(e.to_string()))? {
            match (d.head(), d.list()) {
                (Some("critical"), Some([_, f])) => formulas.push(Eps::from_sexp(f)?),
                (Some("critical"), _) => return Err(UpdateError::Syntax(d.err("expected (critical formula)").to_string())),
                _ => doc.load(&d.to_string(), &Overrides::new())?,
            }
        }
        CriticalSet::new(EpsContext { sig: doc.sig }, &formulas)
    }

    fn value_in(&self, f: &Family, e: &Eps) -> u64 {
        let pos = self.registry.lock().expect("registry").index(e);
        f.get(&Registry::position(pos), pos.1)
    }

    fn normalize_in(&self, e: &Eps, f: &Family) -> UResult<Eps> {
        normalize_by(e, &mut |c| Ok(self.value_in(f, c)), DEFAULT_FUEL)
    }

    fn holds_in(&self, a: &Eps, f: &Family) -> UResult<bool> {
        self.ctx.truth(&self.normalize_in(a, f)?)
    }

    /// The update for the first critical formula false under `S_f`: the
    /// least witness for its ε-term.
    pub fn eval(&self, f: &Family) -> UResult<Update> {
        for c in &self.criticals {
            if self.holds_in(&c.formula(), f)? {
                continue;
            }
            let (e, value) = match c {
                Critical::Witness { var, body, t } => {
                    let bound = self.ctx.term_value(&self.normalize_in(t, f)?)?;
                    let a = self.normalize_in(body, f)?;
                    let mut least = None;
                    for i in 0..=bound {
                        if self.holds_in(&a.subst(var, &Eps::Num(i)), f)? {
                            least = Some(i);
                            break;
                        }
                    }
                    let m0 = least.ok_or_else(|| {
                        UpdateError::NotEvaluable(format!("{c}: no witness up to {bound} although A({bound}) holds"))
                    })?;
                    (Eps::Choice(var.clone(), Box::new(a)), m0)
                }
                Critical::Pred { s } => {
                    let k = self.ctx.term_value(&self.normalize_in(s, f)?)?;
                    (Eps::choice("x", pred_body(&Eps::Num(k), "x")), k.saturating_sub(1))
                }
            };
            let pos = self.registry.lock().expect("registry").index(&e);
            return Ok(Update::learn(Registry::position(pos), pos.1, value));
        }
        Ok(Update::Empty)
    }

    /// The substitution a family stands for, on the ε-terms met so far.
    pub fn substitution(&self, f: &Family) -> EpsSubstitution {
        let reg = self.registry.lock().expect("registry");
        let mut s = EpsSubstitution::new();
        for (level, terms) in &reg.levels {
            for (i, e) in terms.iter().enumerate() {
                let v = f.get(&Registry::position((*level, i as u64)), i as u64);
                s.insert(e, v).expect("registered terms are canonical");
            }
        }
        s
    }

    /// `|Cᵢ|_S` for every critical formula.
    pub fn check(&self, s: &EpsSubstitution) -> UResult<Vec<bool>> {
        self.criticals.iter().map(|c| self.ctx.holds(&c.formula(), s)).collect()
    }

    /// The ε-term named by `(level, index)`, if met.
    pub fn term_at(&self, level: u64, index: u64) -> Option<Eps> {
        self.registry.lock().expect("registry").levels.get(&level)?.get_index(index as usize).cloned()
    }

    /// The learning process of [`critical_update_procedure`] with
    /// controlled updates, decoded back into a substitution.
    pub fn h_process(self: &Arc<Self>, max_steps: usize) -> UResult<HProcess> {
        let u = self.clone().procedure();
        let run = learning_process(&u, Mode::Transfinite, max_steps)?;
        let substitution = self.substitution(&run.zero);
        if let Some(i) = self.check(&substitution)?.iter().position(|ok| !ok) {
            return Err(UpdateError::NotAZero(format!("critical {i} is false under {substitution}")));
        }
        Ok(HProcess { substitution, run })
    }

    pub fn procedure(self: Arc<Self>) -> UpdateProcedure {
        UpdateProcedure::host("criticals", Ordinal::OmegaPow(1), move |f| self.eval(f))
    }
}

/// The update procedure of ordinal `ω` for a list of first-order
/// critical formulas.
pub fn critical_update_procedure(ctx: EpsContext, criticals: &[Eps]) -> UResult<UpdateProcedure> {
    Ok(Arc::new(CriticalSet::new(ctx, criticals)?).procedure())
}

/// A substitution making every critical formula true.
pub fn h_process(ctx: EpsContext, criticals: &[Eps], max_steps: usize) -> UResult<EpsSubstitution> {
    Ok(Arc::new(CriticalSet::new(ctx, criticals)?).h_process(max_steps)?.substitution)
}
