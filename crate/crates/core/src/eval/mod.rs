//! Benchmark task evaluators over embedding stores, and report
//! aggregation. Every main score is on a 0–100 scale.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num;
use crate::types::EmbeddingStore;

pub mod aggregate;
pub mod classification;
pub mod clustering;
pub mod logreg;
pub mod metrics;
pub mod pairs;
pub mod retrieval;

pub use aggregate::{aggregate, aggregate_task_means, DatasetScore, EvalReport};
pub use classification::{eval_classification, eval_multilabel, ClassificationProtocol, MultilabelProtocol};
pub use clustering::{eval_clustering, kmeans, ClusteringProtocol, KMeansResult};
pub use pairs::{eval_pair_classification, eval_sts, PairChannels};
pub use retrieval::{eval_reranking, eval_retrieval, RerankCandidates, RetrievalScores};

/// The seven task types, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Multilabel,
    PairClassification,
    Reranking,
    Retrieval,
    Clustering,
    Sts,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Classification,
        TaskKind::Multilabel,
        TaskKind::PairClassification,
        TaskKind::Reranking,
        TaskKind::Retrieval,
        TaskKind::Clustering,
        TaskKind::Sts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Classification => "classification",
            TaskKind::Multilabel => "multilabel",
            TaskKind::PairClassification => "pair_classification",
            TaskKind::Reranking => "reranking",
            TaskKind::Retrieval => "retrieval",
            TaskKind::Clustering => "clustering",
            TaskKind::Sts => "sts",
        }
    }

    /// Report column header.
    pub fn abbreviation(self) -> &'static str {
        match self {
            TaskKind::Classification => "Cls",
            TaskKind::Multilabel => "MLCls",
            TaskKind::PairClassification => "PCls",
            TaskKind::Reranking => "Rrnk",
            TaskKind::Retrieval => "Rtr",
            TaskKind::Clustering => "Clust",
            TaskKind::Sts => "STS",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid("task", s.to_string()))
    }
}

/// Unit-normalized f64 copy of a stored vector (zero vectors stay zero).
pub(crate) fn unit_vector(store: &EmbeddingStore, id: &str) -> Result<Vec<f64>> {
    let v = store.require(id)?;
    let norm = num::norm(v);
    Ok(v.iter().map(|x| if norm == 0.0 { 0.0 } else { f64::from(*x) / norm }).collect())
}

pub(crate) fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dims(a: &EmbeddingStore, b: &EmbeddingStore) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}
