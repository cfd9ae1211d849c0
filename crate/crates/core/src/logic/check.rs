//! Proof checking with realizer extraction in a single pass.

use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{dummy, fresh_name, typecheck, Ctx, KernelError, Name, Signature, Term, Type};
use crate::realizer::terms::{
    chi_axiom_formula, chi_axiom_realizer, cup_all, em1_formula, em1_realizer, p0, p1, p2, phi_axiom_formula,
    realizer_type,
};

use super::error::{LResult, LogicError};
use super::formula::Formula;
use super::post::{is_atomic_axiom, PostTable};
use super::proof::Proof;

/// The result of checking a proof: its conclusion, the assumptions left
/// open and the extracted realizer.
#[derive(Clone, Debug)]
pub struct Checked {
    pub conclusion: Formula,
    /// Open assumptions by label.
    pub hyps: BTreeMap<Name, Formula>,
    /// Free individual variables of the conclusion and of the open
    /// assumptions.
    pub free_vars: BTreeSet<Name>,
    /// A term of type `|conclusion|` whose free variables are the open
    /// labels (typed by their formulas) and individual variables.
    pub realizer: Term,
}

struct Checker<'a> {
    sig: &'a Signature,
    posts: &'a PostTable,
    /// Labels discharged by an enclosing rule.
    scope: Vec<(Name, Formula)>,
}

struct Node {
    conclusion: Formula,
    hyps: BTreeMap<Name, Formula>,
    realizer: Term,
}

/// Checks `p` and extracts its realizer.
pub fn check_proof(sig: &Signature, posts: &PostTable, p: &Proof) -> LResult<Checked> {
    check_names(p)?;
    let mut c = Checker { sig, posts, scope: Vec::new() };
    let n = c.derive(p)?;
    let mut free_vars = n.conclusion.free_vars();
    for f in n.hyps.values() {
        free_vars.extend(f.free_vars());
    }
    Ok(Checked { conclusion: n.conclusion, hyps: n.hyps, free_vars, realizer: n.realizer })
}

impl super::Document {
    /// Checks a theorem or lemma against its stated formula. The stated
    /// formula becomes the conclusion.
    pub fn check(&self, th: &super::Theorem) -> LResult<Checked> {
        let c = check_proof(&self.sig, &self.posts, &th.proof)?;
        if !c.conclusion.equiv(&th.formula, &self.sig)? {
            return Err(LogicError::mismatch(
                "theorem",
                format!("`{}` proves `{}`, not `{}`", th.name, c.conclusion, th.formula),
            ));
        }
        Ok(Checked { conclusion: th.formula.clone(), ..c })
    }
}

/// Labels and individual variables share the namespace of realizers, so a
/// label may not coincide with any individual variable of the proof.
fn check_names(p: &Proof) -> LResult<()> {
    let mut labels = BTreeSet::new();
    let mut vars = BTreeSet::new();
    let formula_vars = |f: &Formula, vars: &mut BTreeSet<Name>| {
        fn go(f: &Formula, vars: &mut BTreeSet<Name>) {
            match f {
                Formula::Atom(t) => vars.extend(t.free_vars()),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, vars);
                    go(b, vars);
                }
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    vars.insert(x.clone());
                    go(a, vars);
                }
            }
        }
        go(f, vars)
    };
    for n in p.nodes() {
        match n {
            Proof::Hyp(x, f) => {
                labels.insert(x.clone());
                if let Some(f) = f {
                    formula_vars(f, &mut vars);
                }
            }
            Proof::ImpI(x, f, _) => {
                labels.insert(x.clone());
                formula_vars(f, &mut vars);
            }
            Proof::OrE(_, x, _, y, _) => {
                labels.insert(x.clone());
                labels.insert(y.clone());
            }
            Proof::ForallI(a, _) => {
                vars.insert(a.clone());
            }
            Proof::ForallE(_, t) => vars.extend(t.free_vars()),
            Proof::ExistsI(f, t, _) => {
                formula_vars(f, &mut vars);
                vars.extend(t.free_vars());
            }
            Proof::ExistsE(_, a, x, _) => {
                vars.insert(a.clone());
                labels.insert(x.clone());
            }
            Proof::OrI(_, f, _) | Proof::Induction(f, ..) | Proof::Post(_, f, _) | Proof::AtomicAxiom(f) => {
                formula_vars(f, &mut vars)
            }
            Proof::ChiAxiom(_, ts, t) => {
                ts.iter().for_each(|u| vars.extend(u.free_vars()));
                vars.extend(t.free_vars());
            }
            Proof::PhiAxiom(_, ts) => ts.iter().for_each(|u| vars.extend(u.free_vars())),
            Proof::AndI(..) | Proof::AndE(..) | Proof::ImpE(..) | Proof::Em1(_) => {}
        }
    }
    match labels.intersection(&vars).next() {
        Some(x) => Err(LogicError::NameClash(x.clone())),
        None => Ok(()),
    }
}

fn merge(a: &mut BTreeMap<Name, Formula>, b: BTreeMap<Name, Formula>, sig: &Signature) -> LResult<()> {
    for (x, f) in b {
        match a.get(&x) {
            Some(g) if !g.equiv(&f, sig)? => {
                return Err(LogicError::mismatch("hyp", format!("label `{x}` is used for `{g}` and `{f}`")));
            }
            Some(_) => {}
            None => {
                a.insert(x, f);
            }
        }
    }
    Ok(())
}

fn var_ctx(vars: impl IntoIterator<Item = Name>) -> Ctx {
    let mut ctx = Ctx::new();
    for x in vars {
        ctx.push(x, Type::Nat);
    }
    ctx
}

impl<'a> Checker<'a> {
    fn equiv(&self, a: &Formula, b: &Formula) -> LResult<bool> {
        Ok(a.equiv(b, self.sig)?)
    }

    fn expect(&self, rule: &'static str, found: &Formula, wanted: &Formula) -> LResult<()> {
        if self.equiv(found, wanted)? {
            Ok(())
        } else {
            Err(LogicError::mismatch(rule, format!("expected `{wanted}`, found `{found}`")))
        }
    }

    /// Atoms must be boolean terms over individual variables.
    fn well_formed(&self, f: &Formula) -> LResult<()> {
        for t in f.atoms() {
            let ctx = var_ctx(t.free_vars());
            let ty = typecheck(t, &ctx, self.sig)?;
            if ty != Type::Bool {
                return Err(KernelError::TypeMismatch {
                    expected: Type::Bool,
                    found: ty,
                    context: "atomic formula".into(),
                }
                .into());
            }
        }
        Ok(())
    }

    fn individual(&self, t: &Term) -> LResult<()> {
        let ty = typecheck(t, &var_ctx(t.free_vars()), self.sig)?;
        if ty != Type::Nat {
            return Err(KernelError::TypeMismatch { expected: Type::Nat, found: ty, context: "individual term".into() }
                .into());
        }
        Ok(())
    }

    fn with_label<T>(&mut self, x: &Name, f: &Formula, k: impl FnOnce(&mut Self) -> LResult<T>) -> LResult<T> {
        self.scope.push((x.clone(), f.clone()));
        let r = k(self);
        self.scope.pop();
        r
    }

    fn lookup(&self, x: &str) -> Option<&Formula> {
        self.scope.iter().rev().find(|(y, _)| &**y == x).map(|(_, f)| f)
    }

    fn derive(&mut self, p: &Proof) -> LResult<Node> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.derive_inner(p))
    }

    fn derive_inner(&mut self, p: &Proof) -> LResult<Node> {
        let sig = self.sig;
        Ok(match p {
            Proof::Hyp(x, given) => {
                let f = match (self.lookup(x), given) {
                    (Some(f), None) => f.clone(),
                    (Some(f), Some(g)) => {
                        self.expect("hyp", g, f)?;
                        f.clone()
                    }
                    (None, Some(g)) => {
                        self.well_formed(g)?;
                        g.clone()
                    }
                    (None, None) => return Err(LogicError::UnboundHypothesis(x.clone())),
                };
                let realizer = Term::Var(x.clone(), realizer_type(&f));
                Node { hyps: BTreeMap::from([(x.clone(), f.clone())]), conclusion: f, realizer }
            }
            Proof::AndI(a, b) => {
                let mut na = self.derive(a)?;
                let nb = self.derive(b)?;
                merge(&mut na.hyps, nb.hyps, sig)?;
                Node {
                    conclusion: Formula::and(na.conclusion, nb.conclusion),
                    hyps: na.hyps,
                    realizer: Term::pair(na.realizer, nb.realizer),
                }
            }
            Proof::AndE(i, a) => {
                let n = self.derive(a)?;
                let Formula::And(l, r) = n.conclusion else {
                    return Err(LogicError::mismatch("and-e", format!("`{}` is not a conjunction", n.conclusion)));
                };
                let conclusion = if *i == 0 { *l } else { *r };
                Node { conclusion, hyps: n.hyps, realizer: Term::proj(*i, n.realizer) }
            }
            Proof::ImpI(x, a, body) => {
                self.well_formed(a)?;
                let mut n = self.with_label(x, a, |c| c.derive(body))?;
                n.hyps.remove(x);
                Node {
                    conclusion: Formula::implies(a.clone(), n.conclusion),
                    hyps: n.hyps,
                    realizer: Term::lam_n(x.clone(), realizer_type(a), n.realizer),
                }
            }
            Proof::ImpE(f, a) => {
                let mut nf = self.derive(f)?;
                let na = self.derive(a)?;
                let Formula::Implies(ante, cons) = nf.conclusion else {
                    return Err(LogicError::mismatch("imp-e", format!("`{}` is not an implication", nf.conclusion)));
                };
                self.expect("imp-e", &na.conclusion, &ante)?;
                merge(&mut nf.hyps, na.hyps, sig)?;
                Node { conclusion: *cons, hyps: nf.hyps, realizer: Term::app(nf.realizer, na.realizer) }
            }
            Proof::OrI(side, other, a) => {
                self.well_formed(other)?;
                let n = self.derive(a)?;
                let (conclusion, realizer) = if *side == 0 {
                    let d = dummy(&realizer_type(other));
                    (
                        Formula::or(n.conclusion, other.clone()),
                        Term::pair(Term::True, Term::pair(n.realizer, d)),
                    )
                } else {
                    let d = dummy(&realizer_type(other));
                    (
                        Formula::or(other.clone(), n.conclusion),
                        Term::pair(Term::False, Term::pair(d, n.realizer)),
                    )
                };
                Node { conclusion, hyps: n.hyps, realizer }
            }
            Proof::OrE(d, x, l, y, r) => {
                let mut nd = self.derive(d)?;
                let Formula::Or(a, b) = &nd.conclusion else {
                    return Err(LogicError::mismatch("or-e", format!("`{}` is not a disjunction", nd.conclusion)));
                };
                let (a, b) = ((**a).clone(), (**b).clone());
                let mut nl = self.with_label(x, &a, |c| c.derive(l))?;
                let mut nr = self.with_label(y, &b, |c| c.derive(r))?;
                self.expect("or-e", &nr.conclusion, &nl.conclusion)?;
                nl.hyps.remove(x);
                nr.hyps.remove(y);
                merge(&mut nd.hyps, nl.hyps, sig)?;
                merge(&mut nd.hyps, nr.hyps, sig)?;
                let u = nd.realizer;
                let ty = realizer_type(&nl.conclusion);
                let left = Term::app(Term::lam_n(x.clone(), realizer_type(&a), nl.realizer), p1(u.clone()));
                let right = Term::app(Term::lam_n(y.clone(), realizer_type(&b), nr.realizer), p2(u.clone()));
                Node { conclusion: nl.conclusion, hyps: nd.hyps, realizer: Term::ite(ty, p0(u), left, right) }
            }
            Proof::ForallI(a, body) => {
                let n = self.derive(body)?;
                if let Some((h, _)) = n.hyps.iter().find(|(_, f)| f.has_free(a)) {
                    return Err(LogicError::EigenvariableViolation {
                        var: a.clone(),
                        msg: format!("free in open assumption `{h}`"),
                    });
                }
                Node {
                    conclusion: Formula::Forall(a.clone(), Box::new(n.conclusion)),
                    hyps: n.hyps,
                    realizer: Term::lam_n(a.clone(), Type::Nat, n.realizer),
                }
            }
            Proof::ForallE(a, t) => {
                self.individual(t)?;
                let n = self.derive(a)?;
                let Formula::Forall(x, body) = &n.conclusion else {
                    return Err(LogicError::mismatch("all-e", format!("`{}` is not universal", n.conclusion)));
                };
                Node { conclusion: body.subst(x, t), hyps: n.hyps, realizer: Term::app(n.realizer, t.clone()) }
            }
            Proof::ExistsI(f, t, a) => {
                self.well_formed(f)?;
                self.individual(t)?;
                let Formula::Exists(x, body) = f else {
                    return Err(LogicError::mismatch("ex-i", format!("`{f}` is not existential")));
                };
                let n = self.derive(a)?;
                self.expect("ex-i", &n.conclusion, &body.subst(x, t))?;
                Node { conclusion: f.clone(), hyps: n.hyps, realizer: Term::pair(t.clone(), n.realizer) }
            }
            Proof::ExistsE(e, al, x, body) => {
                let mut ne = self.derive(e)?;
                let Formula::Exists(y, a) = &ne.conclusion else {
                    return Err(LogicError::mismatch("ex-e", format!("`{}` is not existential", ne.conclusion)));
                };
                if ne.conclusion.has_free(al) {
                    return Err(LogicError::EigenvariableViolation {
                        var: al.clone(),
                        msg: format!("free in `{}`", ne.conclusion),
                    });
                }
                let inst = a.subst(y, &Term::Var(al.clone(), Type::Nat));
                let mut nb = self.with_label(x, &inst, |c| c.derive(body))?;
                nb.hyps.remove(x);
                if nb.conclusion.has_free(al) {
                    return Err(LogicError::EigenvariableViolation {
                        var: al.clone(),
                        msg: format!("free in the conclusion `{}`", nb.conclusion),
                    });
                }
                if let Some((h, _)) = nb.hyps.iter().find(|(_, f)| f.has_free(al)) {
                    return Err(LogicError::EigenvariableViolation {
                        var: al.clone(),
                        msg: format!("free in open assumption `{h}`"),
                    });
                }
                merge(&mut ne.hyps, nb.hyps, sig)?;
                let u = ne.realizer;
                let lam = Term::lam_n(al.clone(), Type::Nat, Term::lam_n(x.clone(), realizer_type(&inst), nb.realizer));
                let realizer = Term::apps(lam, [Term::proj(0, u.clone()), Term::proj(1, u)]);
                Node { conclusion: nb.conclusion, hyps: ne.hyps, realizer }
            }
            Proof::Induction(f, base, step) => {
                self.well_formed(f)?;
                let Formula::Forall(al, a) = f else {
                    return Err(LogicError::mismatch("ind", format!("`{f}` is not universal")));
                };
                let mut nb = self.derive(base)?;
                self.expect("ind", &nb.conclusion, &a.subst(al, &Term::Zero))?;
                let ns = self.derive(step)?;
                let k = fresh_name(al);
                let kv = Term::Var(k.clone(), Type::Nat);
                let want = Formula::Forall(
                    k.clone(),
                    Box::new(Formula::implies(a.subst(al, &kv), a.subst(al, &Term::succ(kv.clone())))),
                );
                self.expect("ind", &ns.conclusion, &want)?;
                merge(&mut nb.hyps, ns.hyps, sig)?;
                let n = fresh_name(al);
                let realizer = Term::lam_n(
                    n.clone(),
                    Type::Nat,
                    Term::rec(realizer_type(a), nb.realizer, ns.realizer, Term::Var(n, Type::Nat)),
                );
                Node { conclusion: f.clone(), hyps: nb.hyps, realizer }
            }
            Proof::Post(rule, c, ps) => {
                self.well_formed(c)?;
                let Some(ct) = c.as_atom() else {
                    return Err(LogicError::mismatch("post", format!("conclusion `{c}` is not atomic")));
                };
                if ps.is_empty() {
                    return Err(LogicError::mismatch("post", "a Post rule needs at least one premise"));
                }
                let mut hyps = BTreeMap::new();
                let mut premises = Vec::new();
                let mut realizers = Vec::new();
                for (index, q) in ps.iter().enumerate() {
                    let n = self.derive(q)?;
                    let Some(t) = n.conclusion.as_atom() else {
                        return Err(LogicError::NonAtomicPostPremise { rule: rule.clone(), index });
                    };
                    premises.push(t.clone());
                    realizers.push(n.realizer);
                    merge(&mut hyps, n.hyps, sig)?;
                }
                self.posts.check(sig, rule, &premises, ct)?;
                Node { conclusion: c.clone(), hyps, realizer: cup_all(sig, realizers)? }
            }
            Proof::AtomicAxiom(c) => {
                self.well_formed(c)?;
                let Some(t) = c.as_atom() else {
                    return Err(LogicError::mismatch("ax", format!("`{c}` is not atomic")));
                };
                if !is_atomic_axiom(sig, t)? {
                    return Err(LogicError::mismatch("ax", format!("`{c}` is not an atomic axiom")));
                }
                Node { conclusion: c.clone(), hyps: BTreeMap::new(), realizer: Term::empty_state() }
            }
            Proof::Em1(pred) => Node {
                conclusion: em1_formula(sig, pred)?,
                hyps: BTreeMap::new(),
                realizer: em1_realizer(sig, pred)?,
            },
            Proof::ChiAxiom(pred, ts, t) => {
                ts.iter().chain(std::iter::once(t)).try_for_each(|u| self.individual(u))?;
                Node {
                    conclusion: chi_axiom_formula(sig, pred, ts, t)?,
                    hyps: BTreeMap::new(),
                    realizer: chi_axiom_realizer(sig, pred, ts, t)?,
                }
            }
            Proof::PhiAxiom(pred, ts) => {
                ts.iter().try_for_each(|u| self.individual(u))?;
                Node {
                    conclusion: phi_axiom_formula(sig, pred, ts)?,
                    hyps: BTreeMap::new(),
                    realizer: Term::empty_state(),
                }
            }
        })
    }
}

/// The typing context of a checked proof's realizer.
pub fn realizer_ctx(c: &Checked) -> Ctx {
    let mut ctx = var_ctx(c.free_vars.iter().cloned());
    for v in c.realizer.free_vars() {
        if ctx.lookup(&v).is_none() && !c.hyps.contains_key(&v) {
            ctx.push(v, Type::Nat);
        }
    }
    for (x, f) in &c.hyps {
        ctx.push(x.clone(), realizer_type(f));
    }
    ctx
}
