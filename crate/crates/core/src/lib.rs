//! Shallow-parsing ensemble toolkit.
//!
//! Base chunkers are trained on IOB-tagged corpora, scored with chunk-level
//! precision/recall/F, and combined by per-token voting, weighted voting,
//! stacked classifiers, best-N subset voting, or start/end bracket voting.
//! A bottom-up cascade turns a base NP chunker into a nested NP bracketer.

pub mod cascade;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod features;
pub mod learners;
pub mod metrics;

pub use error::{Error, Result};
