//! Classifying networks from structural and attribute features.
//!
//! Graphs are loaded into [`graph::Graph`] collections, summarized as
//! fixed-length feature vectors ([`features`], [`bipartite`]) and classified
//! with from-scratch tree ensembles, nearest neighbors and k-means
//! ([`classify`]).

pub mod bipartite;
pub mod classify;
pub mod error;
pub mod features;
pub mod graph;
pub mod pipeline;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
