//! Query-limited stochastic matching and k-set packing.

pub mod algorithms;
pub mod bench;
pub mod error;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod io;
pub mod kidney;
pub mod kset;
pub mod model;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
