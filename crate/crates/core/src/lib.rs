//! Packing, covering and counting directed Hamilton cycles in random and
//! pseudo-random digraphs.
//!
//! The pipelines share one construction: split the vertices into an
//! `(ℓ,s)`-partition, chain perfect matchings between consecutive blocks into
//! vertex-disjoint paths, contract the paths and close them into a Hamilton
//! cycle through the small block `V₀`.

pub mod bitset;
pub mod error;
pub mod flow;
pub mod graph;
pub mod hamilton;
pub mod matching;
pub mod pipelines;
pub mod pseudorandom;
pub mod seed;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Digraph, HamCycle, PartitionScheme, PathSystem};
