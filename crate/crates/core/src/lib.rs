//! Core algorithms for synthesizing, filtering, batching and evaluating
//! text-embedding training data.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, HTTP clients
//! and the command line live in the `embedforge` companion crate.
//!
//! Module map:
//!
//! - [`types`]: triplets, retrieval collections, embedding stores, labeled examples
//! - [`topics`]: two-label conditional topic distribution (fit + sample)
//! - [`prompts`]: prompt templates, parameter sampling and hardness tiers
//! - [`filter`]: reranker-margin triplet filtering
//! - [`mining`]: std-margin hard-negative mining
//! - [`batching`]: source-homogeneous batching and InfoNCE
//! - [`toy`]: hashing bag-of-words encoder trained end to end
//! - [`vocab`]: embedding-matrix vocabulary trimming
//! - [`eval`]: the seven benchmark task evaluators and report aggregation

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod batching;
pub mod error;
pub mod eval;
pub mod filter;
pub mod mining;
mod num;
pub mod prompts;
pub mod rng;
pub mod topics;
pub mod toy;
pub mod types;
pub mod vocab;

pub use error::{Error, Result};
pub use types::{Category, EmbeddingStore, LabeledExample, RetrievalCollection, Source, StsTargets, Triplet};
