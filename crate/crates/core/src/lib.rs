//! Element-connectivity toolkit: the local delete-or-contract reduction that
//! preserves all pairwise terminal element-connectivities, packing algorithms
//! for element-disjoint Steiner trees and forests (general, planar, and
//! bounded-treewidth hosts), spider decompositions, and a single-sink
//! k-vertex-connectivity greedy, all backed by exact integral flows and
//! cross-checked by brute-force oracles.

pub mod connectivity;
pub mod error;
pub mod exec;
pub mod flow;
pub mod fmt;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod packing;
pub mod planar;
pub mod reduction;
pub mod spider;
pub mod ssk;
pub mod td;
pub mod treewidth;

pub use error::{Error, Result};
pub use graph::{Color, ColoredMultigraph, EdgeId, MinorTrace, TraceRecord, VertexId};
