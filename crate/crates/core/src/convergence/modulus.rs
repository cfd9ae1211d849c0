use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::kernel::Term;

use super::CResult;

/// A host function `Nat -> Nat`. Evaluation may fail when it probes a
/// chain or the kernel.
#[derive(Clone)]
pub struct Fun(Arc<dyn Fn(u64) -> CResult<u64> + Send + Sync>);

impl fmt::Debug for Fun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<fun>")
    }
}

impl Fun {
    pub fn new<F: Fn(u64) -> CResult<u64> + Send + Sync + 'static>(f: F) -> Fun {
        Fun(Arc::new(f))
    }

    pub fn total<F: Fn(u64) -> u64 + Send + Sync + 'static>(f: F) -> Fun {
        Fun::new(move |n| Ok(f(n)))
    }

    pub fn id() -> Fun {
        Fun::total(|n| n)
    }

    /// `λm. m + k`
    pub fn plus(k: u64) -> Fun {
        Fun::total(move |n| n.saturating_add(k))
    }

    pub fn doubling() -> Fun {
        Fun::total(|n| n.saturating_mul(2))
    }

    pub fn call(&self, n: u64) -> CResult<u64> {
        (self.0)(n)
    }

    /// `self ∘ inner`
    pub fn after(&self, inner: &Fun) -> Fun {
        let (f, g) = (self.clone(), inner.clone());
        Fun::new(move |n| f.call(g.call(n)?))
    }

    /// The same function with its values cached.
    pub fn memo(&self) -> Fun {
        let f = self.clone();
        let cache: Mutex<HashMap<u64, u64>> = Mutex::new(HashMap::new());
        Fun::new(move |n| {
            if let Some(v) = cache.lock().expect("memo lock").get(&n) {
                return Ok(*v);
            }
            let v = f.call(n)?;
            cache.lock().expect("memo lock").insert(n, v);
            Ok(v)
        })
    }
}

/// A sequence of closed normal atomic terms, `m ↦ t[s_m]`.
#[derive(Clone)]
pub struct Points(Arc<dyn Fn(u64) -> CResult<Term> + Send + Sync>);

impl fmt::Debug for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<points>")
    }
}

impl Points {
    /// Wraps `f` with a cache.
    pub fn new<F: Fn(u64) -> CResult<Term> + Send + Sync + 'static>(f: F) -> Points {
        let cache: Mutex<HashMap<u64, Term>> = Mutex::new(HashMap::new());
        Points(Arc::new(move |n| {
            if let Some(v) = cache.lock().expect("memo lock").get(&n) {
                return Ok(v.clone());
            }
            let v = f(n)?;
            cache.lock().expect("memo lock").insert(n, v.clone());
            Ok(v)
        }))
    }

    pub fn constant(t: Term) -> Points {
        Points(Arc::new(move |_| Ok(t.clone())))
    }

    pub fn at(&self, n: u64) -> CResult<Term> {
        (self.0)(n)
    }
}

/// A modulus of convergence: given `h ≥ id`, an enumeration `M_h` of
/// intervals `[M_h(z), h(M_h(z))]` on which a sequence is constant.
#[derive(Clone)]
pub struct Modulus(Arc<dyn Fn(&Fun, u64) -> CResult<u64> + Send + Sync>);

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<modulus>")
    }
}

impl Modulus {
    pub fn new<F: Fn(&Fun, u64) -> CResult<u64> + Send + Sync + 'static>(f: F) -> Modulus {
        Modulus(Arc::new(f))
    }

    /// `λh λm. m`, a modulus for every constant sequence.
    pub fn identity() -> Modulus {
        Modulus::new(|_, z| Ok(z))
    }

    pub fn apply(&self, h: &Fun, z: u64) -> CResult<u64> {
        (self.0)(h, z)
    }

    /// `M_h` as a function.
    pub fn at(&self, h: &Fun) -> Fun {
        let (m, h) = (self.clone(), h.clone());
        Fun::new(move |z| m.apply(&h, z))
    }

    /// `M ⊔ N = λh λz. N_h(M_{h∘N_h}(z))`, a modulus for whatever `M` and
    /// `N` are moduli for.
    pub fn join(&self, other: &Modulus) -> Modulus {
        let (m, n) = (self.clone(), other.clone());
        Modulus::new(move |h, z| {
            let nh = n.at(h).memo();
            let inner = h.after(&nh).memo();
            nh.call(m.apply(&inner, z)?)
        })
    }
}

/// `H₁(M, N, g) = λh λz. N'_h(M_{h∘N'_h}(z))` with
/// `N'_h = λn. N_{g(n)} h n`: a modulus for `λn. f_{g(n)}(n)` when `M` is a
/// modulus for `g` and each `N_a` one for `f_a`.
pub fn h1_merge<F>(m: &Modulus, family: F, g: &Points) -> Modulus
where
    F: Fn(&Term) -> CResult<Modulus> + Send + Sync + 'static,
{
    let (m, g) = (m.clone(), g.clone());
    let family = Arc::new(family);
    Modulus::new(move |h, z| {
        let (g, family, h1) = (g.clone(), family.clone(), h.clone());
        let nh = Fun::new(move |n| family(&g.at(n)?)?.apply(&h1, n)).memo();
        let inner = h.after(&nh).memo();
        nh.call(m.apply(&inner, z)?)
    })
}

/// Probe settings for checking a modulus: continuations `h` with their
/// names and the starting points `z`.
#[derive(Clone, Debug)]
pub struct SamplePolicy {
    pub hs: Vec<(String, Fun)>,
    pub zs: std::ops::Range<u64>,
}

impl Default for SamplePolicy {
    /// `h ∈ {id, +1, +5, doubling}`, `z ∈ 0..20`.
    fn default() -> Self {
        SamplePolicy {
            hs: vec![
                ("id".into(), Fun::id()),
                ("+1".into(), Fun::plus(1)),
                ("+5".into(), Fun::plus(5)),
                ("doubling".into(), Fun::doubling()),
            ],
            zs: 0..20,
        }
    }
}

/// One probed interval `[M_h(z), h(M_h(z))]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub h: String,
    pub z: u64,
    pub start: u64,
    pub end: u64,
    /// The value at `start`, printed.
    pub value: String,
    /// Empty when the modulus law holds on this interval.
    pub violation: Option<String>,
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8} {:>4} {:>6} {:>6}  {}", self.h, self.z, self.start, self.end, self.value)?;
        if let Some(v) = &self.violation {
            write!(f, "  VIOLATION: {v}")?;
        }
        Ok(())
    }
}

/// Checks both clauses of the modulus law for `points` on every sample:
/// `M_h(z) ≥ z`, and the points are constant on `[M_h(z), h(M_h(z))]`.
pub fn check_modulus(m: &Modulus, points: &Points, policy: &SamplePolicy) -> CResult<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (name, h) in &policy.hs {
        for z in policy.zs.clone() {
            let start = m.apply(h, z)?;
            let end = h.call(start)?;
            let v = points.at(start)?;
            let mut violation = (start < z).then(|| format!("M_h({z}) = {start} < {z}"));
            if violation.is_none() {
                for i in start..=end {
                    let w = points.at(i)?;
                    if w != v {
                        violation = Some(format!("value at {i} is {w}"));
                        break;
                    }
                }
            }
            rows.push(ReportRow { h: name.clone(), z, start, end, value: v.to_string(), violation });
        }
    }
    Ok(rows)
}
