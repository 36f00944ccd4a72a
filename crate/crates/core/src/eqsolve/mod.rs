//! Polynomial fixpoint systems induced by diagrams, and their solver.

mod assemble;
mod solve;
mod system;
mod text;

pub use assemble::{assemble, Assembly};
pub use solve::{solve, Method, Solution, SolverConfig};
pub use system::{Expr, ExprId, PolySystem, VarInfo};
pub use text::{format_system, parse_system};
