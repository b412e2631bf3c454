//! Source-homogeneous batching and the InfoNCE loss.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num;
use crate::types::Category;

/// One of the training datasets; every batch is drawn from exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TrainingSource {
    Mmarco,
    Fever,
    Hotpotqa,
    Synthetic(Category),
}

impl TrainingSource {
    /// The synthetic classification subset trains without in-batch negatives:
    /// with few distinct labels, other rows' positives are often true matches.
    pub fn uses_in_batch_negatives(self) -> bool {
        self != TrainingSource::Synthetic(Category::LongShort)
    }

    pub fn tag(self) -> &'static str {
        match self {
            TrainingSource::Mmarco => "mmarco",
            TrainingSource::Fever => "fever",
            TrainingSource::Hotpotqa => "hotpotqa",
            TrainingSource::Synthetic(c) => c.as_str(),
        }
    }
}

impl fmt::Display for TrainingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TrainingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmarco" => Ok(TrainingSource::Mmarco),
            "fever" => Ok(TrainingSource::Fever),
            "hotpotqa" => Ok(TrainingSource::Hotpotqa),
            "synthetic-classification" => Ok(TrainingSource::Synthetic(Category::LongShort)),
            other => other
                .parse::<Category>()
                .map(TrainingSource::Synthetic)
                .map_err(|_| Error::invalid("training source", other.to_string())),
        }
    }
}

impl TryFrom<String> for TrainingSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TrainingSource> for String {
    fn from(s: TrainingSource) -> String {
        s.tag().to_string()
    }
}

/// Training mix: three public retrieval sets and five synthetic categories
/// (950K items in total).
pub const REFERENCE_MIX: [(TrainingSource, usize); 8] = [
    (TrainingSource::Mmarco, 310_000),
    (TrainingSource::Fever, 140_000),
    (TrainingSource::Hotpotqa, 170_000),
    (TrainingSource::Synthetic(Category::ShortLong), 80_000),
    (TrainingSource::Synthetic(Category::LongShort), 140_000),
    (TrainingSource::Synthetic(Category::ShortShort), 15_000),
    (TrainingSource::Synthetic(Category::LongLong), 15_000),
    (TrainingSource::Synthetic(Category::Sts), 80_000),
];

pub fn reference_mix() -> BTreeMap<TrainingSource, usize> {
    REFERENCE_MIX.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    #[default]
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSize {
    Small,
    Base,
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub temperature: f64,
    pub learning_rate: f64,
    pub warmup_ratio: f64,
    pub epochs: usize,
    #[serde(default)]
    pub scheduler: Scheduler,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig::supervised(ModelSize::Base)
    }
}

impl TrainingConfig {
    /// Fine-tuning an already supervised embedding model: one epoch,
    /// lr 2e-6 for large models and 1e-5 otherwise, warm-up 0.25.
    pub fn supervised(size: ModelSize) -> Self {
        TrainingConfig {
            batch_size: 1024,
            temperature: 0.05,
            learning_rate: if size == ModelSize::Large { 2e-6 } else { 1e-5 },
            warmup_ratio: 0.25,
            epochs: 1,
            scheduler: Scheduler::Constant,
            seed: 0,
        }
    }

    /// Fine-tuning a masked-LM encoder: three epochs, lr 2e-5, warm-up 0.1.
    pub fn self_supervised() -> Self {
        TrainingConfig { learning_rate: 2e-5, warmup_ratio: 0.1, epochs: 3, ..TrainingConfig::supervised(ModelSize::Base) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::invalid("training config", "batch size must be at least 2"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("training config", "temperature must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("training config", "learning rate must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.warmup_ratio) {
            return Err(Error::invalid("training config", "warm-up ratio outside [0, 1]"));
        }
        Ok(())
    }

    /// Learning rate at optimizer step `step` (0-based) of `total` steps:
    /// linear warm-up over the first `warmup_ratio` of steps, then constant.
    pub fn learning_rate_at(&self, step: usize, total: usize) -> f64 {
        let warmup = libm::ceil(self.warmup_ratio * total as f64) as usize;
        if warmup == 0 || step >= warmup {
            self.learning_rate
        } else {
            self.learning_rate * (step + 1) as f64 / warmup as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub source: TrainingSource,
    /// Indices into the source's item list.
    pub items: Vec<usize>,
    pub in_batch_negatives_enabled: bool,
}

/// Shuffles each source independently, cuts it into full batches (the
/// trailing partial batch is dropped) and shuffles the batch order.
pub fn build_epoch<R: Rng + ?Sized>(
    mix: &BTreeMap<TrainingSource, usize>,
    cfg: &TrainingConfig,
    rng: &mut R,
) -> Result<Vec<Batch>> {
    cfg.validate()?;
    let mut batches = Vec::new();
    for (&source, &count) in mix {
        let mut order: Vec<usize> = (0..count).collect();
        order.shuffle(rng);
        for chunk in order.chunks_exact(cfg.batch_size) {
            batches.push(Batch {
                source,
                items: chunk.to_vec(),
                in_batch_negatives_enabled: source.uses_in_batch_negatives(),
            });
        }
    }
    batches.shuffle(rng);
    Ok(batches)
}

/// Number of full batches an epoch over `mix` yields.
pub fn batches_per_epoch(mix: &BTreeMap<TrainingSource, usize>, batch_size: usize) -> usize {
    mix.values().map(|n| n / batch_size).sum()
}

/// Uniform sample without replacement of `round(fraction * n)` indices,
/// returned in ascending order.
pub fn subsample_indices<R: Rng + ?Sized>(n: usize, fraction: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid("subsample", format!("fraction {fraction} outside [0, 1]")));
    }
    let k = libm::round(fraction * n as f64) as usize;
    let mut picked = index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Which embedding a similarity column compares the query against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    Positive(usize),
    Negative(usize),
}

/// Similarity rows of one batch plus the column layout needed to route
/// gradients back to the embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub columns: Vec<Vec<Candidate>>,
}

/// Builds the candidate pool for a batch given a similarity function.
///
/// With in-batch negatives every query sees all positives and all hard
/// negatives of the batch; otherwise only its own positive and negative.
pub fn candidate_pool<F>(batch_len: usize, has_negatives: bool, in_batch: bool, mut sim: F) -> CandidatePool
where
    F: FnMut(usize, Candidate) -> f64,
{
    let mut rows = Vec::with_capacity(batch_len);
    let mut labels = Vec::with_capacity(batch_len);
    let mut columns = Vec::with_capacity(batch_len);
    for i in 0..batch_len {
        let cols: Vec<Candidate> = if in_batch {
            let mut c: Vec<Candidate> = (0..batch_len).map(Candidate::Positive).collect();
            if has_negatives {
                c.extend((0..batch_len).map(Candidate::Negative));
            }
            c
        } else if has_negatives {
            alloc::vec![Candidate::Positive(i), Candidate::Negative(i)]
        } else {
            alloc::vec![Candidate::Positive(i)]
        };
        rows.push(cols.iter().map(|c| sim(i, *c)).collect());
        labels.push(cols.iter().position(|c| *c == Candidate::Positive(i)).expect("own positive present"));
        columns.push(cols);
    }
    CandidatePool { rows, labels, columns }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoNce {
    pub loss: f64,
    /// d loss / d similarity, same shape as the input rows.
    pub grad: Vec<Vec<f64>>,
}

/// Mean over rows of `-log softmax(row / τ)[label]`, with its analytic
/// gradient `(softmax - onehot) / (τ · rows)`.
pub fn infonce_loss(rows: &[Vec<f64>], labels: &[usize], temperature: f64) -> Result<InfoNce> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no similarity rows"));
    }
    if rows.len() != labels.len() {
        return Err(Error::invalid("infonce", "one label per row required"));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("infonce", "temperature must be positive"));
    }
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(rows.len());
    for (r, (row, &label)) in rows.iter().zip(labels).enumerate() {
        if row.len() < 2 {
            return Err(Error::invalid("infonce", format!("row {r} has fewer than 2 candidates")));
        }
        if label >= row.len() {
            return Err(Error::invalid("infonce", format!("label {label} out of range in row {r}")));
        }
        if let Some(col) = row.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSimilarity { row: r, col });
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|s| num::exp((s - max) / temperature)).collect();
        let z: f64 = exps.iter().sum();
        loss += num::ln(z) - (row[label] - max) / temperature;
        let g = exps
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let p = e / z;
                let target = if j == label { 1.0 } else { 0.0 };
                (p - target) / (temperature * n)
            })
            .collect();
        grad.push(g);
    }
    Ok(InfoNce { loss: loss / n, grad })
}
