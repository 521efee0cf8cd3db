//! Contention resolution schemes for matchings: marginal constructions,
//! exact oracles, Monte Carlo estimation and a small submodular pipeline.

pub mod analytics;
pub mod cli;
pub mod csfm;
pub mod error;
pub mod graph;
pub mod instance;
pub mod mc;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod schemes;

pub use error::{CrsError, Result};
