//! Predict per-spot cell-type abundances from histology patch embeddings and
//! evaluate them, including spatial colocalization statistics.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod objective;
pub mod patchprep;
pub mod regressor;
pub mod spatial;

pub use error::{Error, Result};
