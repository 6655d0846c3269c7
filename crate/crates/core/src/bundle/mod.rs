//! Monotone decremental spanners and `t`-bundles built from them.

pub mod chain;
pub mod monotone;

pub use chain::{BundleAudit, BundleChain};
pub use monotone::{MonotoneConfig, MonotoneSpanner};
