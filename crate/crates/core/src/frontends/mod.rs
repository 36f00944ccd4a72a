//! Compilers from (model, query) pairs to explanation generators.

mod gpl;
mod pctl;
mod reach;
mod rmc;
mod term;

pub use gpl::{outcome_token, parse_gpl_defs, parse_gpl_query, Def, GplChecker, GplDefs, GplPath, GplQuery, GplState};
pub use pctl::{parse_pctl, Cmp, PathFormula, PctlChecker, StateFormula};
pub use reach::{next_token, ReachProvider};
pub use rmc::{rmc_exit_formulae, rmc_state, rmc_to_rplts, RmcQuery};
pub use term::{parse_term, Term};
