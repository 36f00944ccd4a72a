//! Model classes (chains, reactive systems, recursive chains) and their
//! text formats.

mod dist;
mod dtmc;
mod lexer;
mod rmc;
mod rplts;

pub use dist::{Distribution, SUM_TOLERANCE};
pub use dtmc::{parse_dtmc, Dtmc};
pub use rmc::{parse_rmc, Component, Port, Rmc, RmcBox};
pub use rplts::{parse_rplts, Rplts};
