//! Explanation generators: the grammar IR, the instance order, the
//! well-formedness check, and brute-force explanation oracles.

mod enumerate;
mod grammar;
mod instance;
mod validate;

pub use enumerate::{bounded_mass, enumerate_explanations, Atom, Enumeration, Explanation, ENUMERATION_WORK_CAP};
pub use grammar::{BodySym, ExplGrammar, FixKind, Goal, GoalProvider, Loc, Production, TableProvider};
pub use instance::{Instance, InstanceRel};
pub use validate::{check_production, validate_temporal, Violation};
