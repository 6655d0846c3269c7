//! Decremental spanners from exponential start-time clustering.

pub mod cluster;
pub mod decremental;
pub mod dynamic;
pub mod offsets;

pub use cluster::{ClusterTree, ClusterUpdate};
pub use decremental::{DecrementalSpanner, SpannerCounters};
pub use dynamic::{spanner_capacity, FullyDynamicSpanner};
pub use offsets::{exp_sample, ExpOffsets};
