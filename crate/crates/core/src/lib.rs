//! Distance geometry toolkit: exact and optimization-based realizations of
//! weighted graphs, conic relaxations, dimensionality reduction, clustering
//! and a small text-to-graph pipeline.

pub mod ann;
pub mod cluster;
pub mod conic;
pub mod dimred;
pub mod embed_exact;
pub mod error;
pub mod graphs;
pub mod instability;
pub mod linalg;
pub mod realize_opt;
pub mod rng;
pub mod textgraph;

pub use error::{Error, Result};
pub use linalg::{Matrix, Realization};
