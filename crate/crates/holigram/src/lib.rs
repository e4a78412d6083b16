//! Word embeddings (Skip-gram and CBOW with negative sampling) plus an
//! experiment harness: analogy evaluation, distributional-similarity
//! correlation, and an exactly-computable truth-value-potential lab on
//! finite micro-languages.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod lab;
pub mod persist;
pub mod trainer;
pub mod util;

pub use error::{Error, Result};
