//! deg+1-coloring of virtual multigraphs hosted on bandwidth-limited
//! synchronous networks.
//!
//! A *virtual graph* is a multigraph `H` whose vertices live on connected
//! machine sets (supports) of a communication network `G`; every vertex owns
//! a support tree used for broadcast and converge-cast, and every parallel
//! edge is assigned a handler machine in the intersection of its endpoints'
//! supports. The crate provides:
//!
//! - [`multigraph`]: multigraph storage, partial colorings, and exact slack
//!   quantities (savings, redundancy, inaccuracy, unevenness, sparsity);
//! - [`netsim`]: a deterministic seeded round engine with per-link bandwidth
//!   ledgers and O(congestion·dilation) tree scheduling;
//! - [`embedding`]: identity / power / cluster / file embeddings on the
//!   subdivision graph, plus validators;
//! - [`sketches`]: mergeable geometric-max cardinality fingerprints;
//! - [`acd`]: the almost-clique decomposition and its checker;
//! - [`trials`]: random color trial, multicolor trial, clique-palette query,
//!   clique-palette sampler and slice color;
//! - [`dense`]: slack generation and the dense-vertex coloring phases
//!   (non-cabals, cabals with put-aside sets, inaccurate vertices);
//! - [`lowdeg`]: the low-degree machinery (palette binary search, palette
//!   learning, Linial-style auxiliary coloring, shattering, deterministic
//!   finish);
//! - [`lowerbound`]: the two-party matching-3-coloring gadget with exact
//!   zero-communication strategy evaluation;
//! - [`pipeline`] / [`config`] / [`gen`]: the end-to-end driver, run
//!   configuration and instance generators backing the CLI.

pub mod acd;
pub mod calib;
pub mod config;
pub mod dense;
pub mod embedding;
pub mod gen;
pub mod lowdeg;
pub mod lowerbound;
pub mod multigraph;
pub mod netsim;
pub mod pipeline;
pub mod sketches;
pub mod trials;
pub mod util;

pub use multigraph::{Color, MultiGraph, PartialColoring, VertexId};
