use std::cell::Cell;

use serde::Serialize;

use super::ordinal::{Family, OrdCode, Update};
use super::procedure::UpdateProcedure;
use super::{UResult, UpdateError};

/// A procedure over `ω^k`, on families whose levels are `k`-tuples.
type PowProc<'a> = dyn Fn(&Family) -> UResult<Update> + 'a;

/// Result of [`zero_br`].
#[derive(Clone, Debug, Serialize)]
pub struct BarZero {
    pub family: Family,
    /// Evaluations of the procedure spent, over all nested bar recursions.
    pub evaluations: u64,
}

struct Budget {
    used: Cell<u64>,
    limit: u64,
}

impl Budget {
    fn tick(&self) -> UResult<()> {
        let n = self.used.get() + 1;
        if n > self.limit {
            return Err(UpdateError::FuelExhausted { limit: self.limit });
        }
        self.used.set(n);
        Ok(())
    }
}

fn eval(u: &PowProc<'_>, f: &Family, budget: &Budget) -> UResult<Update> {
    budget.tick()?;
    u(f)
}

fn head(u: &Update) -> Option<u64> {
    match u {
        Update::Learn { level: OrdCode::Vec(xs), .. } => xs.first().copied(),
        _ => None,
    }
}

/// `ŝ` for a sequence of numbers: the function `Nat → Nat` on level `<>`.
fn hat0(s: &[u64]) -> Family {
    let mut f = Family::zero();
    for (i, v) in s.iter().enumerate() {
        f.set(OrdCode::Vec(Vec::new()), i as u64, *v);
    }
    f
}

/// `ŝ` for a sequence of families over `ω^{k-1}`: level `(i, δ)` reads
/// `s_i` at `δ`.
fn hat(s: &[Family]) -> Family {
    let mut f = Family::zero();
    for (i, g) in s.iter().enumerate() {
        for (l, n, m) in g.iter() {
            let OrdCode::Vec(d) = l else { continue };
            let mut xs = vec![i as u64];
            xs.extend(d);
            f.set(OrdCode::Vec(xs), n, m);
        }
    }
    f
}

/// `U_i`: the updates of `U` on levels `(i, δ)`, re-indexed by `δ`.
fn level_projection(u: Update, i: u64) -> Update {
    match u {
        Update::Learn { level: OrdCode::Vec(xs), arg, value } if xs.first() == Some(&i) => {
            Update::learn(OrdCode::Vec(xs[1..].to_vec()), arg, value)
        }
        _ => Update::Empty,
    }
}

/// Bar recursion of type `Nat` for a procedure of ordinal `1`:
///
/// ```text
/// BR(s) = ŝ                if U ŝ = ∅ or U ŝ = (n, m) with n < |s|
///       = BR(s * m)        if U (BR(s * 0)) = (|s|, m)
///       = BR(s * 0)        otherwise
/// ```
fn br0(s: &mut Vec<u64>, u: &PowProc<'_>, budget: &Budget) -> UResult<Family> {
    stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
        let here = hat0(s);
        match eval(u, &here, budget)? {
            Update::Empty => return Ok(here),
            Update::Learn { arg, .. } if arg < s.len() as u64 => return Ok(here),
            _ => {}
        }
        s.push(0);
        let r0 = br0(s, u, budget);
        s.pop();
        let r0 = r0?;
        match eval(u, &r0, budget)? {
            Update::Learn { arg, value, .. } if arg == s.len() as u64 => {
                s.push(value);
                let r = br0(s, u, budget);
                s.pop();
                r
            }
            _ => Ok(r0),
        }
    })
}

/// Bar recursion of type `ω^{k-1} → (Nat → Nat)` for a procedure of
/// ordinal `ω^k`, `k ≥ 1`:
///
/// ```text
/// BR(s) = ŝ                if U ŝ = ∅ or U ŝ = ((γ, β), n, m) with γ < |s|
///       = BR(s * g_s)      otherwise
/// g_s   = Zero_{ω^{k-1}}(λf. U_{|s|}(BR(s * f)))
/// ```
fn brk(k: u32, s: &[Family], u: &PowProc<'_>, budget: &Budget) -> UResult<Family> {
    stacker::maybe_grow(64 * 1024, 1024 * 1024, || {
        let here = hat(s);
        let up = eval(u, &here, budget)?;
        if up.is_empty() || head(&up).is_some_and(|g| g < s.len() as u64) {
            return Ok(here);
        }
        let i = s.len() as u64;
        let inner = |f: &Family| -> UResult<Update> {
            let mut t = s.to_vec();
            t.push(f.clone());
            let r = brk(k, &t, u, budget)?;
            Ok(level_projection(eval(u, &r, budget)?, i))
        };
        let g = zero_pow(k - 1, &inner, budget)?;
        let mut t = s.to_vec();
        t.push(g);
        brk(k, &t, u, budget)
    })
}

/// `Zero_{ω^k}(U) = BR(⟨⟩)`.
fn zero_pow(k: u32, u: &PowProc<'_>, budget: &Budget) -> UResult<Family> {
    if k == 0 {
        br0(&mut Vec::new(), u, budget)
    } else {
        brk(k, &[], u, budget)
    }
}

/// A finite zero of `u` computed by the bar-recursive zero finders for
/// ordinals `1`, `ω` and `ω^k`, after embedding `u`'s ordinal into the
/// least `ω^k` containing it.
///
/// `fuel` bounds the number of evaluations of `u`. The nested recursions
/// re-evaluate `u` on many extensions of the same sequence, so the cost
/// grows exponentially with the number of levels touched.
pub fn zero_br(u: &UpdateProcedure, fuel: u64) -> UResult<BarZero> {
    let o = u.ordinal;
    let k = o.exponent();
    let to_own = |f: &Family| -> Family {
        let mut g = Family::zero();
        for (l, n, m) in f.iter() {
            if let Some(c) = match l {
                OrdCode::Vec(xs) => o.project(xs),
                _ => None,
            } {
                g.set(c, n, m);
            }
        }
        g
    };
    let lifted = |f: &Family| -> UResult<Update> {
        Ok(match u.eval(&to_own(f))? {
            Update::Empty => Update::Empty,
            Update::Learn { level, arg, value } => {
                let xs = o.embed(&level).ok_or_else(|| UpdateError::LevelOutOfRange(level.to_string()))?;
                Update::learn(OrdCode::Vec(xs), arg, value)
            }
        })
    };
    let budget = Budget { used: Cell::new(0), limit: fuel };
    let family = to_own(&zero_pow(k, &lifted, &budget)?);
    let rest = u.eval(&family)?;
    if !rest.is_empty() {
        return Err(UpdateError::NotAZero(format!("U({family}) = {rest}")));
    }
    Ok(BarZero { family, evaluations: budget.used.get() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::update::Ordinal;

    #[test]
    fn constant_procedure() {
        for o in [Ordinal::Fin(1), Ordinal::OmegaPow(1), Ordinal::OmegaPow(3), Ordinal::OmegaTimes2] {
            let u = UpdateProcedure::host("empty", o, |_| Ok(Update::Empty));
            let z = zero_br(&u, 10).unwrap();
            assert!(z.family.is_zero());
            assert_eq!(z.evaluations, 1);
        }
    }

    #[test]
    fn far_argument() {
        // Asks for f(40) = 1: the bar is reached at depth 41.
        let u = UpdateProcedure::host("far", Ordinal::Fin(1), |f| {
            Ok(if f.get(&OrdCode::Fin(0), 40) == 1 { Update::Empty } else { Update::learn(OrdCode::Fin(0), 40, 1) })
        });
        let z = zero_br(&u, 10_000).unwrap();
        assert_eq!(z.family.get(&OrdCode::Fin(0), 40), 1);
    }

    #[test]
    fn fuel_is_reported() {
        let u = UpdateProcedure::host("far", Ordinal::Fin(1), |f| {
            Ok(if f.get(&OrdCode::Fin(0), 40) == 1 { Update::Empty } else { Update::learn(OrdCode::Fin(0), 40, 1) })
        });
        assert!(matches!(zero_br(&u, 10), Err(UpdateError::FuelExhausted { limit: 10 })));
    }
}
