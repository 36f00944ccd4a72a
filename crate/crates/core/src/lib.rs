//! Probabilistic model checking by factoring explanation generators into
//! decision diagrams and solving the induced polynomial fixpoint system.

pub mod engine;
pub mod eqsolve;
pub mod error;
pub mod explgen;
pub mod fed;
pub mod frontends;
pub mod model;
pub mod simulate;
pub mod symbol;

pub use engine::{analyze, Analysis, Counts, EngineConfig};
pub use error::{Error, Result};
