//! Faultline-aware team partitioning.
//!
//! Splits a population of multi-attribute individuals into fixed-size teams
//! with minimal faultline potential, measured by conflict triangles: oriented
//! triples in which two members agree on a feature and both disagree with the
//! third. The library covers the scoring measure and its constant-update fast
//! paths, the iterative splitter with exact and greedy b-matching, rival
//! measures for benchmarking, penalty-scheme learning from team outcomes, and
//! seeded synthetic instance generators.

pub mod alt;
pub mod error;
pub mod measure;
pub mod model;
pub mod partition;
pub mod penalty;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
