//! The bundled proof documents.

pub const EM1: &str = include_str!("../corpus/em1.nd");
pub const MINIMUM: &str = include_str!("../corpus/minimum.nd");
pub const COQUAND: &str = include_str!("../corpus/coquand.nd");

/// Name and source of every bundled document.
pub const DOCUMENTS: &[(&str, &str)] = &[("em1", EM1), ("minimum", MINIMUM), ("coquand", COQUAND)];

/// Name and source of every bundled update procedure file.
pub const PROCEDURES: &[(&str, &str)] = &[
    ("u1", include_str!("../corpus/procs/u1.up")),
    ("fin2", include_str!("../corpus/procs/fin2.up")),
    ("omega", include_str!("../corpus/procs/omega.up")),
    ("omega2", include_str!("../corpus/procs/omega2.up")),
    ("omega-times-2", include_str!("../corpus/procs/omega-times-2.up")),
];

/// Name and source of every bundled set of critical formulas.
pub const CRITICALS: &[(&str, &str)] = &[
    ("p4", include_str!("../corpus/eps/p4.eps")),
    ("witness", include_str!("../corpus/eps/witness.eps")),
    ("nested", include_str!("../corpus/eps/nested.eps")),
    ("pred", include_str!("../corpus/eps/pred.eps")),
];
