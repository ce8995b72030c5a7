//! A functional object-oriented network (FOON) engine.
//!
//! Functional units (inputs, one motion, outputs) annotated from individual
//! sources are merged into one deduplicated network. The network can be
//! abstracted to coarser hierarchy levels, expanded with similar objects,
//! compressed by object categories, and searched backwards for task trees
//! that produce a goal object from what is available in a kitchen.
//!
//! Crate feature `parallel` (on by default) runs the data-parallel parts
//! (per-unit expansion, pairwise similarity, benchmark trials) on rayon.
//! Without it every [`Exec`] mode runs sequentially.

pub mod exec;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod parser;
pub mod retrieval;
pub mod rng;
pub mod similarity;
pub mod synthetic;
pub mod transform;

pub use exec::Exec;
pub use graph::{graph_stats, FoonGraph, GraphStats, ObjectId, UnitId};
pub use model::{
    node_identity, unit_equals, FunctionalUnit, HierarchyLevel, Kitchen, ModelError, MotionNode, NodeKey, ObjectNode,
    TimeSpan, UnitKey,
};
pub use parser::{ParseError, ParseErrorKind, Subgraph};
