//! A small s-expression reader shared by every surface syntax in the crate.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
    /// `{ ... }`, used for state literals.
    Brace(Vec<Sexp>, Pos),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct SexpError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SexpError {
    pub fn at(pos: Pos, msg: impl Into<String>) -> SexpError {
        SexpError { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) | Sexp::Brace(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs, _) => Some(xs),
            _ => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list()?.first()?.atom()
    }

    pub fn num(&self) -> Option<u64> {
        self.atom()?.parse().ok()
    }

    pub fn err(&self, msg: impl Into<String>) -> SexpError {
        SexpError::at(self.pos(), msg)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = |f: &mut fmt::Formatter<'_>, xs: &[Sexp], open: &str, close: &str| {
            write!(f, "{open}")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "{close}")
        };
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(xs, _) => seq(f, xs, "(", ")"),
            Sexp::Brace(xs, _) => seq(f, xs, "{", "}"),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' | '{' => {
                self.bump();
                let close = if c == '(' { ')' } else { '}' };
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(SexpError::at(start, "unclosed delimiter")),
                        Some(&d) if d == close => {
                            self.bump();
                            break;
                        }
                        Some(&d) if d == ')' || d == '}' => {
                            return Err(SexpError::at(self.pos, format!("unexpected `{d}`")))
                        }
                        _ => items.push(self.read()?.expect("input not exhausted")),
                    }
                }
                Ok(Some(if c == '(' {
                    Sexp::List(items, start)
                } else {
                    Sexp::Brace(items, start)
                }))
            }
            ')' | '}' => Err(SexpError::at(start, format!("unexpected `{c}`"))),
            _ => {
                let mut s = String::new();
                while let Some(&d) = self.chars.peek() {
                    if d.is_whitespace() || "(){};".contains(d) {
                        break;
                    }
                    s.push(d);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(s, start)))
            }
        }
    }
}

/// Reads every top-level expression of `src`.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader { chars: src.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(x) = r.read()? {
        out.push(x);
    }
    Ok(out)
}

/// Reads exactly one expression.
pub fn read_one(src: &str) -> Result<Sexp, SexpError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().expect("one element")),
        0 => Err(SexpError { line: 1, col: 1, msg: "empty input".into() }),
        _ => Err(SexpError::at(all[1].pos(), "trailing input")),
    }
}
