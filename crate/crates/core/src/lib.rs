//! Batch-dynamic graph spanners and spectral sparsifiers.

pub mod bundle;
pub mod contraction;
pub mod error;
pub mod estree;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod ordered_list;
pub mod spanner;
pub mod sparsifier;
pub mod wrapper;

pub use error::{Error, Result};
pub use graph::{DeltaEdges, Edge, Graph, UpdateBatch, VertexId, WeightedEdge};
