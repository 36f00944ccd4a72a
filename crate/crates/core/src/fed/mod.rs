//! Factored explanation diagrams.

mod construct;
mod dot;
mod order;
mod store;

pub use dot::to_dot;
pub use order::{node_order, Header, NodeKind, NodeOrder};
pub use store::{
    FedId, FedLimits, FedNode, FedStore, GoalRef, MergeGoal, MergeId, MergeRef, MergeRefId, Op, RelocId, VarKey,
};
