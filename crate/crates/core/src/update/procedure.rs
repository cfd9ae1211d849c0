use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kernel::{cantor_pair, cantor_unpair, normalize_with_fuel, typecheck, Ctx, Signature, Term, Type, DEFAULT_FUEL};

use super::ordinal::{Family, OrdCode, Ordinal, Update};
use super::{UResult, UpdateError};

type HostFn = dyn Fn(&Family) -> UResult<Update> + Send + Sync;

/// A value read off a family by a scripted rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(u64),
    /// `f_β(n)`
    At(OrdCode, u64),
    Add(Box<Expr>, Box<Expr>),
    /// Truncated subtraction.
    Sub(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, f: &Family) -> u64 {
        match self {
            Expr::Num(n) => *n,
            Expr::At(l, n) => f.get(l, *n),
            Expr::Add(a, b) => a.eval(f).saturating_add(b.eval(f)),
            Expr::Sub(a, b) => a.eval(f).saturating_sub(b.eval(f)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

/// One line of a scripted procedure: when every condition holds, emit
/// `⟨level, arg, value⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub when: Vec<(CmpOp, Expr, Expr)>,
    pub level: OrdCode,
    pub arg: u64,
    pub value: Expr,
}

impl Rule {
    fn fires(&self, f: &Family) -> bool {
        self.when.iter().all(|(op, a, b)| {
            let (a, b) = (a.eval(f), b.eval(f));
            match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
            }
        })
    }
}

#[derive(Clone)]
enum Imp {
    Host(Arc<HostFn>),
    /// A term `(Nat → Nat)^k → Nat` returning `|(i, n, m)|`.
    Term { sig: Signature, term: Term, fuel: u64 },
    /// First matching rule wins; no match gives `∅`.
    Rules(Vec<Rule>),
}

/// A map from families over an ordinal to updates.
#[derive(Clone)]
pub struct UpdateProcedure {
    pub name: String,
    pub ordinal: Ordinal,
    imp: Imp,
}

impl fmt::Debug for UpdateProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.imp {
            Imp::Host(_) => "host",
            Imp::Term { .. } => "term",
            Imp::Rules(_) => "rules",
        };
        write!(f, "UpdateProcedure({}, {}, {kind})", self.name, self.ordinal)
    }
}

/// `|∅| = 0` and `|(i, n, m)| = 1 + ⟨i, ⟨n, m⟩⟩` with Cantor pairs and
/// levels counted from `1`.
pub fn encode_update(u: &Update) -> Option<u64> {
    match u {
        Update::Empty => Some(0),
        Update::Learn { level: OrdCode::Fin(i), arg, value } => {
            cantor_pair(i + 1, cantor_pair(*arg, *value)?)?.checked_add(1)
        }
        Update::Learn { .. } => None,
    }
}

/// Inverse of [`encode_update`] for an ordinal `k`.
pub fn decode_update(code: u64, k: u64) -> UResult<Update> {
    if code == 0 {
        return Ok(Update::Empty);
    }
    let (i, nm) = cantor_unpair(code - 1);
    let (n, m) = cantor_unpair(nm);
    if i == 0 || i > k {
        return Err(UpdateError::LevelOutOfRange(format!("code {code} names level {i} of ordinal {k}")));
    }
    Ok(Update::learn(OrdCode::Fin(i - 1), n, m))
}

/// The level `i` of a family as a kernel term `Nat → Nat`.
fn level_term(f: &Family, i: u64) -> Term {
    let x = Term::var("x", Type::Nat);
    let eq = Term::constant("eq", Type::arrows([Type::Nat, Type::Nat], Type::Bool));
    let body = f.level(&OrdCode::Fin(i)).into_iter().rev().fold(Term::Zero, |acc, (n, m)| {
        Term::ite(Type::Nat, Term::apps(eq.clone(), [x.clone(), Term::num(n)]), Term::num(m), acc)
    });
    Term::lam("x", Type::Nat, body)
}

impl UpdateProcedure {
    pub fn host<F>(name: &str, ordinal: Ordinal, f: F) -> UpdateProcedure
    where
        F: Fn(&Family) -> UResult<Update> + Send + Sync + 'static,
    {
        UpdateProcedure { name: name.into(), ordinal, imp: Imp::Host(Arc::new(f)) }
    }

    pub fn rules(name: &str, ordinal: Ordinal, rules: Vec<Rule>) -> UResult<UpdateProcedure> {
        for r in &rules {
            let levels = std::iter::once(&r.level).chain(r.when.iter().flat_map(|(_, a, b)| [a, b]).flat_map(levels_of));
            if let Some(l) = levels.into_iter().find(|l| !ordinal.contains(l)) {
                return Err(UpdateError::LevelOutOfRange(format!("{l} in a rule of `{name}` over {ordinal}")));
            }
        }
        Ok(UpdateProcedure { name: name.into(), ordinal, imp: Imp::Rules(rules) })
    }

    /// A typed update procedure of finite ordinal `k`: a closed term of
    /// type `(Nat → Nat)^k → Nat`.
    pub fn term(name: &str, sig: &Signature, term: Term, k: u64) -> UResult<UpdateProcedure> {
        let want = Type::arrows(vec![Type::arrow(Type::Nat, Type::Nat); k as usize], Type::Nat);
        let ty = typecheck(&term, &Ctx::new(), sig)?;
        if ty != want {
            return Err(UpdateError::Shape(format!("`{name}` has type {ty}, expected {want}")));
        }
        Ok(UpdateProcedure {
            name: name.into(),
            ordinal: Ordinal::Fin(k),
            imp: Imp::Term { sig: sig.clone(), term, fuel: DEFAULT_FUEL },
        })
    }

    /// `U f`. Fails when the answer lies outside the ordinal.
    pub fn eval(&self, f: &Family) -> UResult<Update> {
        let u = match &self.imp {
            Imp::Host(h) => h(f)?,
            Imp::Rules(rs) => match rs.iter().find(|r| r.fires(f)) {
                Some(r) => Update::learn(r.level.clone(), r.arg, r.value.eval(f)),
                None => Update::Empty,
            },
            Imp::Term { sig, term, fuel } => {
                let Ordinal::Fin(k) = self.ordinal else { unreachable!("term procedures are finite") };
                let app = Term::apps(term.clone(), (0..k).map(|i| level_term(f, i)));
                let (nf, _) = normalize_with_fuel(sig, &app, *fuel)?;
                let code = nf.as_num().ok_or_else(|| UpdateError::Shape(format!("`{nf}` is not a numeral")))?;
                decode_update(code, k)?
            }
        };
        match u.level() {
            Some(l) if !self.ordinal.contains(l) => {
                Err(UpdateError::LevelOutOfRange(format!("{u} from `{}` over {}", self.name, self.ordinal)))
            }
            _ => Ok(u),
        }
    }

    /// The kernel term of a term procedure.
    pub fn as_term(&self) -> Option<&Term> {
        match &self.imp {
            Imp::Term { term, .. } => Some(term),
            _ => None,
        }
    }
}

fn levels_of(e: &Expr) -> Vec<&OrdCode> {
    match e {
        Expr::Num(_) => Vec::new(),
        Expr::At(l, _) => vec![l],
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let mut v = levels_of(a);
            v.extend(levels_of(b));
            v
        }
    }
}

/// `f ⊕ ⟨β, n, m⟩` without collapse: only `f_β(n)` changes.
pub fn oplus_flat(f: &Family, u: &Update) -> Family {
    match u {
        Update::Empty => f.clone(),
        Update::Learn { level, arg, value } => f.clone().with(level.clone(), *arg, *value),
    }
}

/// Controlled update: keep every level below `β`, overwrite `f_β(n)` and
/// zero every level above `β`.
pub fn oplus_transfinite(f: &Family, u: &Update) -> Family {
    match u {
        Update::Empty => f.clone(),
        Update::Learn { level, arg, value } => {
            let mut g = f.clone();
            g.retain(|l, _| l <= level);
            g.with(level.clone(), *arg, *value)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Flat,
    Transfinite,
}

impl Mode {
    pub fn apply(self, f: &Family, u: &Update) -> Family {
        match self {
            Mode::Flat => oplus_flat(f, u),
            Mode::Transfinite => oplus_transfinite(f, u),
        }
    }
}

/// One step `U^(i+1) = U^(i) ⊕ U(U^(i))` of a learning process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub update: Update,
    /// Points of `U^(i)` that the step erased, excluding the overwritten one.
    pub collapsed: Vec<(OrdCode, u64, u64)>,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t", self.step, self.update)?;
        match (self.collapsed.first(), self.collapsed.last()) {
            (Some((lo, _, _)), Some((hi, _, _))) => {
                write!(f, "collapsed {} value(s) on levels {lo}..{hi}", self.collapsed.len())
            }
            _ => write!(f, "-"),
        }
    }
}

/// Result of [`learning_process`].
#[derive(Clone, Debug, Serialize)]
pub struct LearningRun {
    pub zero: Family,
    pub trace: Vec<TraceStep>,
    /// `U^(0), …, U^(n)`.
    #[serde(skip)]
    pub chain: Vec<Family>,
}

impl LearningRun {
    /// The trace as tab-separated line records.
    pub fn lines(&self) -> String {
        self.trace.iter().map(|s| format!("{s}\n")).collect()
    }
}

/// Iterates `U^(0) = 0`, `U^(n+1) = U^(n) ⊕ U(U^(n))` until `U` answers `∅`.
pub fn learning_process(u: &UpdateProcedure, mode: Mode, max_steps: usize) -> UResult<LearningRun> {
    let mut f = Family::zero();
    let mut trace = Vec::new();
    let mut chain = vec![f.clone()];
    loop {
        let up = u.eval(&f)?;
        if up.is_empty() {
            return Ok(LearningRun { zero: f, trace, chain });
        }
        if trace.len() >= max_steps {
            return Err(UpdateError::StepBudgetExceeded { steps: max_steps, last: up.to_string() });
        }
        let g = mode.apply(&f, &up);
        let collapsed = f
            .iter()
            .filter(|(l, n, _)| g.get(l, *n) == 0 && Some(*l) != up.level())
            .map(|(l, n, m)| (l.clone(), n, m))
            .collect();
        trace.push(TraceStep { step: trace.len() + 1, update: up, collapsed });
        chain.push(g.clone());
        f = g;
    }
}

/// Settings for probing condition (2) of update procedures.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub probes: usize,
    pub seed: u64,
    /// Bound on the coordinates of sampled levels.
    pub width: u64,
    pub args: u64,
    pub values: u64,
    /// Give up after this many draws of `f` with `U f = ∅`.
    pub max_draws: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { probes: 500, seed: 0, width: 4, args: 8, values: 10, max_draws: 20_000 }
    }
}

/// A pair `(f, g)` breaking condition (2).
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub f: Family,
    pub g: Family,
    pub uf: Update,
    pub ug: Update,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub probes: usize,
    pub draws: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn random_family(u: &UpdateProcedure, cfg: &ProbeConfig, rng: &mut ChaCha8Rng) -> Family {
    let mut f = Family::zero();
    for _ in 0..rng.gen_range(0..6) {
        f.set(u.ordinal.sample(rng, cfg.width), rng.gen_range(0..cfg.args), rng.gen_range(0..cfg.values));
    }
    f
}

/// Checks condition (2) on random pairs: whenever `U f = ⟨β, n, m⟩`, `g`
/// agrees with `f` below `β` and `g_β(n) = m`, then `U g` is not an update
/// of `g_β` at `n`.
///
/// Half of the `f` are drawn from the procedure's own learning process, the
/// rest at random; `g` keeps `f` below `β`, sets `g_β(n) = m` and is random
/// elsewhere on levels `≥ β`.
pub fn validate(u: &UpdateProcedure, cfg: &ProbeConfig) -> UResult<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds = learning_process(u, Mode::Transfinite, 1000).map(|r| r.chain).unwrap_or_default();
    let mut report = ValidationReport { probes: 0, draws: 0, violations: Vec::new() };
    while report.probes < cfg.probes && report.draws < cfg.max_draws {
        report.draws += 1;
        let f = if !seeds.is_empty() && rng.gen_bool(0.5) {
            let mut f = seeds[rng.gen_range(0..seeds.len())].clone();
            if rng.gen_bool(0.3) {
                f.set(u.ordinal.sample(&mut rng, cfg.width), rng.gen_range(0..cfg.args), rng.gen_range(0..cfg.values));
            }
            f
        } else {
            random_family(u, cfg, &mut rng)
        };
        let uf = u.eval(&f)?;
        let Update::Learn { level, arg, value } = &uf else { continue };
        report.probes += 1;
        let mut g = f.clone();
        g.retain(|l, _| l < level);
        for (l, n, m) in random_family(u, cfg, &mut rng).iter() {
            if l >= level {
                g.set(l.clone(), n, m);
            }
        }
        if rng.gen_bool(0.5) {
            for (l, n, m) in f.iter().filter(|(l, _, _)| *l >= level) {
                g.set(l.clone(), n, m);
            }
        }
        g.set(level.clone(), *arg, *value);
        let ug = u.eval(&g)?;
        if let Update::Learn { level: l2, arg: n2, .. } = &ug {
            if l2 == level && n2 == arg {
                report.violations.push(Violation { f, g, uf: uf.clone(), ug });
            }
        }
    }
    Ok(report)
}
