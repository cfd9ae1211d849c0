use std::collections::BTreeSet;
use std::sync::Arc;

use super::term::{fresh_name, Name, Term};

/// Capture-avoiding substitution `t[u/x]`.
pub fn subst(t: &Term, x: &str, u: &Term) -> Term {
    let fv = u.free_vars();
    subst_opt(t, x, u, &fv).unwrap_or_else(|| t.clone())
}

/// Simultaneous substitution of several variables.
pub fn subst_many(t: &Term, pairs: &[(Name, Term)]) -> Term {
    let mut out = t.clone();
    // Rename the targets apart first so that later substitutions cannot
    // touch variables introduced by earlier ones.
    let mut staged = Vec::new();
    for (x, u) in pairs {
        if pairs.iter().any(|(_, v)| v.has_free(x)) {
            let tmp = fresh_name(x);
            out = subst(&out, x, &Term::Var(tmp.clone(), var_type(t, x).unwrap_or(super::Type::Nat)));
            staged.push((tmp, u.clone()));
        } else {
            staged.push((x.clone(), u.clone()));
        }
    }
    for (x, u) in staged {
        out = subst(&out, &x, &u);
    }
    out
}

fn var_type(t: &Term, x: &str) -> Option<super::Type> {
    let mut found = None;
    t.visit(&mut |s| {
        if let Term::Var(y, ty) = s {
            if &**y == x && found.is_none() {
                found = Some(ty.clone());
            }
        }
    });
    found
}

fn subst_opt(t: &Term, x: &str, u: &Term, fv: &BTreeSet<Name>) -> Option<Term> {
    stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || match t {
        Term::Var(y, _) => (&**y == x).then(|| u.clone()),
        Term::Succ(a) => subst_opt(a, x, u, fv).map(|a| Term::Succ(Arc::new(a))),
        Term::Proj(i, a) => subst_opt(a, x, u, fv).map(|a| Term::Proj(*i, Arc::new(a))),
        Term::App(a, b) => pair_opt(a, b, x, u, fv).map(|(a, b)| Term::App(a, b)),
        Term::Pair(a, b) => pair_opt(a, b, x, u, fv).map(|(a, b)| Term::Pair(a, b)),
        Term::Lam(y, ty, b) => {
            if &**y == x || !b.has_free(x) {
                return None;
            }
            if fv.contains(y) {
                let y2 = fresh_name(y);
                let renamed = subst(b, y, &Term::Var(y2.clone(), ty.clone()));
                let body = subst_opt(&renamed, x, u, fv).unwrap_or(renamed);
                Some(Term::Lam(y2, ty.clone(), Arc::new(body)))
            } else {
                subst_opt(b, x, u, fv).map(|b| Term::Lam(y.clone(), ty.clone(), Arc::new(b)))
            }
        }
        Term::Seq(ty, xs) => {
            let new: Vec<Option<Term>> = xs.iter().map(|s| subst_opt(s, x, u, fv)).collect();
            if new.iter().all(Option::is_none) {
                None
            } else {
                Some(Term::Seq(
                    ty.clone(),
                    new.into_iter()
                        .zip(xs)
                        .map(|(n, old)| n.unwrap_or_else(|| old.clone()))
                        .collect(),
                ))
            }
        }
        _ => None,
    })
}

fn pair_opt(
    a: &Arc<Term>,
    b: &Arc<Term>,
    x: &str,
    u: &Term,
    fv: &BTreeSet<Name>,
) -> Option<(Arc<Term>, Arc<Term>)> {
    let na = subst_opt(a, x, u, fv);
    let nb = subst_opt(b, x, u, fv);
    if na.is_none() && nb.is_none() {
        return None;
    }
    Some((
        na.map(Arc::new).unwrap_or_else(|| a.clone()),
        nb.map(Arc::new).unwrap_or_else(|| b.clone()),
    ))
}

/// Equality up to renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    let mut env = Vec::new();
    alpha(a, b, &mut env)
}

fn alpha(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    match (a, b) {
        (Term::Var(x, tx), Term::Var(y, ty)) => {
            if tx != ty {
                return false;
            }
            for (l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Succ(x), Term::Succ(y)) => alpha(x, y, env),
        (Term::Proj(i, x), Term::Proj(j, y)) => i == j && alpha(x, y, env),
        (Term::App(f, x), Term::App(g, y)) | (Term::Pair(f, x), Term::Pair(g, y)) => {
            alpha(f, g, env) && alpha(x, y, env)
        }
        (Term::Lam(x, tx, bx), Term::Lam(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha(bx, by, env);
            env.pop();
            r
        }
        (Term::Seq(tx, xs), Term::Seq(ty, ys)) => {
            tx == ty && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha(x, y, env))
        }
        _ => {
            !matches!(a, Term::Var(..) | Term::Lam(..) | Term::App(..)) && a == b
        }
    }
}

/// Renames bound variables to `_0`, `_1`, ... by binding depth, so that
/// alpha-equivalent terms become syntactically equal.
pub fn canonical(t: &Term) -> Term {
    let mut env = Vec::new();
    canon(t, &mut env)
}

fn canon(t: &Term, env: &mut Vec<(Name, Name)>) -> Term {
    match t {
        Term::Var(x, ty) => {
            for (old, new) in env.iter().rev() {
                if old == x {
                    return Term::Var(new.clone(), ty.clone());
                }
            }
            t.clone()
        }
        Term::Succ(a) => Term::Succ(Arc::new(canon(a, env))),
        Term::Proj(i, a) => Term::Proj(*i, Arc::new(canon(a, env))),
        Term::App(a, b) => Term::App(Arc::new(canon(a, env)), Arc::new(canon(b, env))),
        Term::Pair(a, b) => Term::Pair(Arc::new(canon(a, env)), Arc::new(canon(b, env))),
        Term::Lam(x, ty, b) => {
            let new = Name::from(format!("_{}", env.len()));
            env.push((x.clone(), new.clone()));
            let body = canon(b, env);
            env.pop();
            Term::Lam(new, ty.clone(), Arc::new(body))
        }
        Term::Seq(ty, xs) => Term::Seq(ty.clone(), xs.iter().map(|x| canon(x, env)).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Type;

    fn v(x: &str) -> Term {
        Term::var(x, Type::Nat)
    }

    #[test]
    fn substitution_avoids_capture() {
        // (λy. x)[y/x] must not become λy. y
        let t = Term::lam("y", Type::Nat, v("x"));
        let r = subst(&t, "x", &v("y"));
        match &r {
            Term::Lam(z, _, body) => {
                assert_ne!(&**z, "y");
                assert_eq!(**body, v("y"));
            }
            _ => panic!("expected lambda"),
        }
    }

    #[test]
    fn bound_occurrences_untouched() {
        let t = Term::lam("x", Type::Nat, v("x"));
        assert_eq!(subst(&t, "x", &Term::num(3)), t);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::lam("x", Type::Nat, v("x"));
        let b = Term::lam("y", Type::Nat, v("y"));
        assert!(alpha_eq(&a, &b));
        assert_eq!(canonical(&a), canonical(&b));
        let c = Term::lam("y", Type::Nat, v("x"));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn simultaneous_swap() {
        let t = Term::pair(v("x"), v("y"));
        let r = subst_many(&t, &[("x".into(), v("y")), ("y".into(), v("x"))]);
        assert_eq!(r, Term::pair(v("y"), v("x")));
    }
}
