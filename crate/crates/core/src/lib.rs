//! Inference in polytree-shaped credal networks.

pub mod ar;
pub mod ar_plus;
pub mod bnb;
pub mod cli;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod harness;
pub mod local_search;
pub mod model;

pub use error::InferenceError;
