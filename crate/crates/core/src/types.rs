//! Domain types shared by every module.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Synthetic data category, one per prompt template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "short-long")]
    ShortLong,
    #[serde(rename = "long-short")]
    LongShort,
    #[serde(rename = "short-short")]
    ShortShort,
    #[serde(rename = "long-long")]
    LongLong,
    #[serde(rename = "sts")]
    Sts,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::ShortLong,
        Category::LongShort,
        Category::ShortShort,
        Category::LongLong,
        Category::Sts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ShortLong => "short-long",
            Category::LongShort => "long-short",
            Category::ShortShort => "short-short",
            Category::LongLong => "long-long",
            Category::Sts => "sts",
        }
    }

    pub fn index(self) -> u64 {
        match self {
            Category::ShortLong => 0,
            Category::LongShort => 1,
            Category::ShortShort => 2,
            Category::LongLong => 3,
            Category::Sts => 4,
        }
    }

    /// JSON keys the generator must emit for this category, in template order.
    pub fn response_keys(self) -> [&'static str; 3] {
        match self {
            Category::ShortLong => ["user-query", "positive-document", "hard-negative-document"],
            Category::ShortShort | Category::LongLong => ["input", "positive-document", "hard-negative-document"],
            Category::LongShort => ["input-text", "label", "misleading-label"],
            Category::Sts => ["S1", "S2", "S3"],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid("category", s.to_string()))
    }
}

/// Where a triplet came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Synthetic,
    Mmarco,
    Fever,
    Hotpotqa,
    Other,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Synthetic => "synthetic",
            Source::Mmarco => "mmarco",
            Source::Fever => "fever",
            Source::Hotpotqa => "hotpotqa",
            Source::Other => "other",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Source::Synthetic, Source::Mmarco, Source::Fever, Source::Hotpotqa, Source::Other]
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid("source", s.to_string()))
    }
}

/// Target similarity scores of an STS triple: S1~S2 is `high`, S1~S3 is `low`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StsTargets {
    pub high: f64,
    pub low: f64,
}

/// One contrastive example.
///
/// For [`Category::Sts`] the three texts are S1, S2 and S3 (stored in
/// `query`, `positive` and `negative`) and `sts` carries the target scores.
/// For [`Category::LongShort`] the query is the input text and the
/// positive/negative are the correct and misleading labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub id: String,
    pub category: Category,
    pub query: String,
    pub positive: String,
    pub negative: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sts: Option<StsTargets>,
    #[serde(default)]
    pub source: Source,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl Triplet {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("triplet", "empty id"));
        }
        if self.query.trim().is_empty() {
            return Err(Error::invalid("triplet", "empty query"));
        }
        if self.positive.trim().is_empty() {
            return Err(Error::invalid("triplet", "empty positive"));
        }
        let has_negative = self.negative.as_deref().is_some_and(|n| !n.trim().is_empty());
        if self.category == Category::Sts {
            let t = self
                .sts
                .ok_or_else(|| Error::invalid("triplet", "sts triplet without target scores"))?;
            let in_range = |x: f64| (1.0..=5.0).contains(&x);
            if !in_range(t.high) || !in_range(t.low) {
                return Err(Error::invalid("triplet", "sts score outside [1, 5]"));
            }
            if t.high < t.low {
                return Err(Error::invalid("triplet", "sts high score below low score"));
            }
        } else if !has_negative {
            return Err(Error::invalid("triplet", "empty negative"));
        }
        Ok(())
    }
}

/// BEIR-style corpus, queries and graded judgments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetrievalCollection {
    pub corpus: BTreeMap<String, String>,
    pub queries: BTreeMap<String, String>,
    pub qrels: BTreeMap<String, BTreeMap<String, u32>>,
}

impl RetrievalCollection {
    /// Checks that every judged id resolves.
    pub fn validate(&self) -> Result<()> {
        for (qid, docs) in &self.qrels {
            if !self.queries.contains_key(qid) {
                return Err(Error::DanglingReference(qid.clone()));
            }
            for did in docs.keys() {
                if !self.corpus.contains_key(did) {
                    return Err(Error::DanglingReference(did.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn judged_pairs(&self) -> usize {
        self.qrels.values().map(BTreeMap::len).sum()
    }
}

/// Fixed-dimension map from id to float vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding store", "dimension must be positive"));
        }
        Ok(EmbeddingStore { dim, entries: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: vector.len() });
        }
        if let Some(i) = vector.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid("embedding store", format!("non-finite component {i}")));
        }
        self.entries.insert(id.into(), vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    /// Like [`get`](Self::get) but fails with `MissingEmbedding`.
    pub fn require(&self, id: &str) -> Result<&[f32]> {
        self.get(id).ok_or_else(|| Error::MissingEmbedding(id.to_string()))
    }

    /// Entries in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Text with one or more labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    #[serde(default)]
    pub text: String,
    pub labels: Vec<String>,
}

impl LabeledExample {
    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::invalid("labeled example", format!("{} has no labels", self.id)));
        }
        let unique: BTreeSet<&String> = self.labels.iter().collect();
        if unique.len() != self.labels.len() {
            return Err(Error::invalid("labeled example", format!("{} has duplicate labels", self.id)));
        }
        Ok(())
    }
}
