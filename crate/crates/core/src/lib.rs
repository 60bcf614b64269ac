//! k-nn graph construction, search, and maintenance.
//!
//! The crate builds directed k-nearest-neighbour graphs over generic items
//! (vectors or strings) and keeps them useful as data arrives:
//!
//! - [`oracle`] builds exact graphs and answers exact queries by brute
//!   force; everything faster is measured against it.
//! - [`search`] answers approximate queries by hill climbing over the graph
//!   under a hard similarity-evaluation budget, classic and improved
//!   variants.
//! - [`online`] grows a graph one item at a time, wiring each arrival in
//!   with a search followed by a bounded neighbourhood update.
//! - [`partition`] splits a graph into balanced clusters around medoids;
//!   [`distributed`] runs search and online building across those clusters
//!   with shared-nothing workers.
//! - [`bench`] reproduces the experiment protocols and writes CSV.
//!
//! All randomness flows from explicit seeds; every operation is
//! deterministic given its inputs.

pub mod bench;
pub mod cli;
pub mod datasets;
pub mod distributed;
pub mod error;
pub mod graph;
pub mod item;
pub mod metrics;
pub mod neighbor;
pub mod online;
pub mod oracle;
pub mod partition;
pub mod scoring;
pub mod search;
pub mod similarity;

pub use error::{Error, Result};
pub use graph::Graph;
pub use item::{Item, ItemId, ItemStore, Payload};
pub use neighbor::{Neighbor, NeighborList};
pub use similarity::SimilarityMeasure;

/// Derive an independent stream seed from a base seed and a salt (an item
/// id, repetition index, or partition index). A zero salt returns the base
/// seed unchanged.
pub(crate) fn mix_seed(base: u64, salt: u64) -> u64 {
    base ^ salt.wrapping_mul(0x9E3779B97F4A7C15)
}
