//! Diachronic word embeddings with drift-regularized Bernoulli models.

pub mod corpus;
pub mod crosslingual;
pub mod drift;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod seed;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
