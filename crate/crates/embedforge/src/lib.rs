//! File formats, network clients and the command line around
//! [`embedforge_core`].
//!
//! - [`io`]: triplet, collection, embedding, matrix and auxiliary formats
//! - [`generation`]: the journaled LLM generation campaign
//! - [`rerank`]: cached reranker scoring for triplet filtering
//! - [`evaluate`]: task manifests, dataset loading and report rendering
//! - [`cli`]: argument parsing and subcommand dispatch

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod generation;
pub mod io;
pub mod rerank;
pub mod runlog;

pub use embedforge_core as core;
pub use error::{Error, Result};
