//! Graph-algorithmic and numerical tools for causal representation learning
//! with observed sources used as conditioning auxiliaries.
//!
//! The pieces compose into a pipeline: pick a conditioning subset of the
//! observed nodes ([`select`]), which fixes a partition of the unobserved
//! latents ([`dsep::partition`]); simulate a linear SCM over the graph
//! ([`scm`]), push it through a volume-preserving mixing ([`mixing`]), check
//! the rank condition on the conditional score vectors ([`rank`]), and score
//! recovered latents ([`metrics`]).

pub mod dsep;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod mixing;
pub mod pipeline;
pub mod rank;
pub mod sample;
pub mod scm;
pub mod select;

pub use error::{Error, Result};
pub use graph::{build_dag, node_set, topological_order, Dag, NodeId, NodeSet};
pub use sample::SampleMatrix;
