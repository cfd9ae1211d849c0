//! Reading documents, tables and procedure files.

use std::path::Path;

use lbr_core::logic::{Checked, Document, LogicError, Overrides};

use crate::{Error, Result};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Numerals separated by commas or whitespace.
pub fn parse_values(s: &str) -> Result<Vec<u64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| w.parse().map_err(|_| Error::Usage(format!("`{w}` is not a numeral"))))
        .collect()
}

/// A table given inline (`3,2,1,0`) or as a file of numerals.
pub fn table_values(spec: &str) -> Result<Vec<u64>> {
    let p = Path::new(spec);
    if p.is_file() {
        parse_values(&read(p)?)
    } else {
        parse_values(spec)
    }
}

/// Parses `NAME=VALUES` table overrides.
pub fn overrides<'a, I: IntoIterator<Item = &'a String>>(tables: I) -> Result<Overrides> {
    let mut o = Overrides::new();
    for t in tables {
        let (name, spec) = t.split_once('=').ok_or_else(|| Error::Usage(format!("expected NAME=VALUES, got `{t}`")))?;
        o.insert(name.to_string(), table_values(spec)?);
    }
    Ok(o)
}

/// A checked theorem of a document.
pub struct Loaded {
    pub doc: Document,
    pub name: String,
    pub checked: Checked,
}

/// Checks the named theorem or lemma, or the last theorem.
pub fn theorem(doc: Document, name: Option<&str>) -> Result<Loaded> {
    let th = match name {
        Some(n) => doc.theorem(n).ok_or_else(|| Error::Usage(format!("no theorem or lemma named `{n}`")))?,
        None => doc.main().ok_or_else(|| Error::Usage("the document has no theorem".into()))?,
    };
    let checked = doc.check(th)?;
    let name = th.name.clone();
    Ok(Loaded { doc, name, checked })
}

pub fn document(src: &str, tables: &Overrides) -> std::result::Result<Document, LogicError> {
    Document::parse_with(src, tables)
}

pub fn load_theorem(path: &Path, name: Option<&str>, tables: &Overrides) -> Result<Loaded> {
    theorem(document(&read(path)?, tables)?, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_values("3, 2 1\n0").unwrap(), vec![3, 2, 1, 0]);
        assert!(parse_values("3 x").is_err());
        let o = overrides(&["f=1,2".to_string()]).unwrap();
        assert_eq!(o["f"], vec![1, 2]);
        assert!(overrides(&["f".to_string()]).is_err());
    }
}
