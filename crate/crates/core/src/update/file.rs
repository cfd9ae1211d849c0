//! Procedure files.
//!
//! ```text
//! (fun h (x) (plus x 1))                 ; kernel declarations, optional
//! (procedure NAME (ordinal ORD) BODY)
//! ORD   := 3 | w | w^2 | w*2
//! BODY  := (term T)                      ; finite ordinals only
//!        | (rule COND... (learn LEVEL ARG EXPR))...
//! LEVEL := 2 | (1 4) | w | w+3
//! EXPR  := N | (at LEVEL ARG) | (+ EXPR EXPR) | (- EXPR EXPR)
//! COND  := (= EXPR EXPR) | (!= EXPR EXPR) | (< EXPR EXPR) | (<= EXPR EXPR)
//! ```

use crate::logic::{Document, Overrides};
use crate::sexp::{self, Sexp};

use super::ordinal::{OrdCode, Ordinal};
use super::procedure::{CmpOp, Expr, Rule, UpdateProcedure};
use super::{UResult, UpdateError};

fn syn(s: &Sexp, msg: impl Into<String>) -> UpdateError {
    UpdateError::Syntax(s.err(msg).to_string())
}

fn ordinal(s: &Sexp) -> UResult<Ordinal> {
    let a = s.atom().ok_or_else(|| syn(s, "ordinal expected"))?;
    let o = match a {
        "w" => Ordinal::OmegaPow(1),
        "w*2" => Ordinal::OmegaTimes2,
        _ => match (a.strip_prefix("w^"), a.parse::<u64>()) {
            (Some(k), _) => Ordinal::OmegaPow(k.parse().map_err(|_| syn(s, "bad exponent"))?),
            (None, Ok(k)) if k > 0 => Ordinal::Fin(k),
            _ => return Err(syn(s, "ordinal expected: k, w, w^k or w*2")),
        },
    };
    Ok(o)
}

fn level(o: Ordinal, s: &Sexp) -> UResult<OrdCode> {
    let bad = || syn(s, format!("not a level of {o}"));
    let c = match (o, s) {
        (Ordinal::Fin(_), _) => OrdCode::Fin(s.num().ok_or_else(bad)?),
        (Ordinal::OmegaPow(1), Sexp::Atom(..)) => OrdCode::Vec(vec![s.num().ok_or_else(bad)?]),
        (Ordinal::OmegaPow(_), Sexp::List(xs, _)) => {
            OrdCode::Vec(xs.iter().map(|x| x.num().ok_or_else(bad)).collect::<UResult<_>>()?)
        }
        (Ordinal::OmegaTimes2, Sexp::Atom(a, _)) => match a.as_str() {
            "w" => OrdCode::OmegaPlus(1, 0),
            _ => match a.strip_prefix("w+") {
                Some(n) => OrdCode::OmegaPlus(1, n.parse().map_err(|_| bad())?),
                None => OrdCode::OmegaPlus(0, a.parse().map_err(|_| bad())?),
            },
        },
        _ => return Err(bad()),
    };
    if !o.contains(&c) {
        return Err(bad());
    }
    Ok(c)
}

fn expr(o: Ordinal, s: &Sexp) -> UResult<Expr> {
    if let Some(n) = s.num() {
        return Ok(Expr::Num(n));
    }
    match (s.head(), s.list()) {
        (Some("at"), Some([_, l, n])) => Ok(Expr::At(level(o, l)?, n.num().ok_or_else(|| syn(n, "argument expected"))?)),
        (Some("+"), Some([_, a, b])) => Ok(Expr::Add(Box::new(expr(o, a)?), Box::new(expr(o, b)?))),
        (Some("-"), Some([_, a, b])) => Ok(Expr::Sub(Box::new(expr(o, a)?), Box::new(expr(o, b)?))),
        _ => Err(syn(s, "expression expected")),
    }
}

fn rule(o: Ordinal, s: &Sexp) -> UResult<Rule> {
    let xs = s.list().ok_or_else(|| syn(s, "rule expected"))?;
    let (last, conds) = xs[1..].split_last().ok_or_else(|| syn(s, "rule needs a (learn ...) clause"))?;
    let mut when = Vec::new();
    for c in conds {
        let op = match c.head() {
            Some("=") => CmpOp::Eq,
            Some("!=") => CmpOp::Ne,
            Some("<") => CmpOp::Lt,
            Some("<=") => CmpOp::Le,
            _ => return Err(syn(c, "condition expected")),
        };
        let [_, a, b] = c.list().expect("head implies list") else { return Err(syn(c, "binary condition expected")) };
        when.push((op, expr(o, a)?, expr(o, b)?));
    }
    match (last.head(), last.list()) {
        (Some("learn"), Some([_, l, n, v])) => Ok(Rule {
            when,
            level: level(o, l)?,
            arg: n.num().ok_or_else(|| syn(n, "argument expected"))?,
            value: expr(o, v)?,
        }),
        _ => Err(syn(last, "expected (learn level arg expr)")),
    }
}

/// Reads the procedures of a file.
pub fn parse_procedures(src: &str) -> UResult<Vec<UpdateProcedure>> {
    let mut doc = Document::default();
    let mut out = Vec::new();
    for d in sexp::read_all(src).map_err(|e| UpdateError::Syntax(e.to_string()))? {
        if d.head() != Some("procedure") {
            doc.load(&d.to_string(), &Overrides::new())?;
            continue;
        }
        let xs = d.list().expect("head implies list");
        let (Some(name), Some(ord)) = (xs.get(1).and_then(Sexp::atom), xs.get(2)) else {
            return Err(syn(&d, "expected (procedure name (ordinal o) body)"));
        };
        let o = match (ord.head(), ord.list()) {
            (Some("ordinal"), Some([_, o])) => ordinal(o)?,
            _ => return Err(syn(ord, "expected (ordinal o)")),
        };
        let body = &xs[3..];
        let p = match body {
            [t] if t.head() == Some("term") => {
                let Ordinal::Fin(k) = o else { return Err(syn(t, "term procedures need a finite ordinal")) };
                let [_, term] = t.list().expect("head implies list") else { return Err(syn(t, "expected (term t)")) };
                UpdateProcedure::term(name, &doc.sig, doc.term(term)?, k)?
            }
            _ => UpdateProcedure::rules(name, o, body.iter().map(|r| rule(o, r)).collect::<UResult<_>>()?)?,
        };
        out.push(p);
    }
    Ok(out)
}

/// Reads a file holding exactly one procedure.
pub fn parse_procedure(src: &str) -> UResult<UpdateProcedure> {
    let mut ps = parse_procedures(src)?;
    match ps.len() {
        1 => Ok(ps.remove(0)),
        n => Err(UpdateError::Syntax(format!("expected one procedure, found {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::update::{Family, Update};

    #[test]
    fn reads_levels() {
        let p = parse_procedure("(procedure p (ordinal w*2) (rule (!= (at w+1 0) 3) (learn w+1 0 3)))").unwrap();
        assert_eq!(p.eval(&Family::zero()).unwrap(), Update::learn(OrdCode::OmegaPlus(1, 1), 0, 3));
        assert!(parse_procedure("(procedure p (ordinal 2) (rule (learn 2 0 1)))").is_err());
        assert!(parse_procedure("(procedure p (ordinal w^2) (rule (learn (0 1) 0 1)))").is_ok());
    }

    #[test]
    fn reads_terms() {
        let src = "(procedure u (ordinal 1) (term (lam (f (-> Nat Nat)) ((if Nat) (eq (f 3) 5) 0 (S ((const pair) 1 ((const pair) 3 5)))))))";
        let p = parse_procedure(src).unwrap();
        assert_eq!(p.eval(&Family::zero()).unwrap(), Update::learn(OrdCode::Fin(0), 3, 5));
        assert!(p.eval(&Family::zero().with(OrdCode::Fin(0), 3, 5)).unwrap().is_empty());
    }
}
