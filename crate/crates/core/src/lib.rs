//! Success and failure statistics of ensemble (pseudopure-state) Grover
//! search read out by a bitwise majority vote, compared against a randomized
//! classical sequential search that spends the same number of oracle calls.

pub mod critical;
pub mod error;
pub mod grover;
pub mod montecarlo;
pub mod roots;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
