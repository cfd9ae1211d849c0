//! Knowledge states and the learning constants built on them.

mod learn;
mod state;

pub use learn::{add, chi, learn_rule_step, learn_type, phi, LearnOp};
pub use state::{Atom, KnowledgeState};
