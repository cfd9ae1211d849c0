//! The term calculus: simple types, terms of System T extended with oracle
//! constants, state literals, `Y` and bar recursion, together with typing,
//! substitution, reduction and a textual syntax.

mod error;
mod reduce;
mod signature;
mod subst;
mod syntax;
mod term;
mod typecheck;
mod types;

pub use error::{KResult, KernelError};
pub use reduce::{
    normalize, normalize_by_steps, normalize_with_fuel, step, step_with, Machine, Strategy, DEFAULT_FUEL,
};
pub use signature::{cantor_pair, cantor_unpair, ConstDef, ConstKind, PredicateSig, RuleFn, Signature, CUP, MAX_NUMERAL};
pub use subst::{alpha_eq, canonical, subst, subst_many};
pub use syntax::{
    is_name, parse_term, parse_term_in, parse_type, print_term, print_term_with, type_from_sexp, PrintOpts,
    TermParser, KEYWORDS,
};
pub use term::{dummy, fresh_name, Name, SeqOp, Term};
pub use typecheck::{br_arg_types, primitive_type, typecheck, Ctx};
pub use types::Type;
