//! Joint coverage regions: sets in parameter × observable space that cover an
//! unknown parameter and an unobserved datapoint simultaneously.

pub mod apps;
pub mod cli;
pub mod dist;
pub mod error;
pub mod harness;
pub mod invariance;
pub mod linmod;
pub mod pivots;
pub mod region;
pub mod rng;

pub use error::{JcrError, Result};
