//! A hashing bag-of-words linear encoder trained with the InfoNCE loss.
//!
//! It exists to check the training contract end to end on a task small
//! enough for a unit test, not to produce a useful model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batching::{self, Candidate, TrainingConfig, TrainingSource};
use crate::error::{Error, Result};
use crate::num;
use crate::rng;
use crate::types::{Category, EmbeddingStore, RetrievalCollection, Source, Triplet};

pub const DEFAULT_HASH_DIM: usize = 4096;
pub const DEFAULT_EMBED_DIM: usize = 64;

/// `weights` is row-major `hash_dim × embed_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEncoder {
    pub hash_dim: usize,
    pub embed_dim: usize,
    pub seed: u64,
    pub weights: Vec<f64>,
}

fn fnv1a(token: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn gaussian<R: Rng + ?Sized>(r: &mut R) -> f64 {
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    num::sqrt(-2.0 * num::ln(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Forward pass of one text, kept for backpropagation.
struct Encoded {
    buckets: Vec<(usize, f64)>,
    norm: f64,
    unit: Vec<f64>,
}

impl ToyEncoder {
    /// Gaussian weights with variance `1 / embed_dim`.
    pub fn new(hash_dim: usize, embed_dim: usize, seed: u64) -> Result<Self> {
        if hash_dim == 0 || embed_dim == 0 {
            return Err(Error::invalid("toy encoder", "dimensions must be positive"));
        }
        let mut r = rng::seeded(seed);
        let scale = 1.0 / num::sqrt(embed_dim as f64);
        let weights = (0..hash_dim * embed_dim).map(|_| gaussian(&mut r) * scale).collect();
        Ok(ToyEncoder { hash_dim, embed_dim, seed, weights })
    }

    pub fn with_defaults(seed: u64) -> Self {
        ToyEncoder::new(DEFAULT_HASH_DIM, DEFAULT_EMBED_DIM, seed).expect("default dims are positive")
    }

    /// Bucket counts of the whitespace-split, lowercased tokens.
    pub fn bucket_counts(&self, text: &str) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in text.split_whitespace() {
            let b = (fnv1a(&tok.to_lowercase()) % self.hash_dim as u64) as usize;
            *counts.entry(b).or_default() += 1.0;
        }
        counts.into_iter().collect()
    }

    fn forward(&self, text: &str) -> Result<Encoded> {
        let buckets = self.bucket_counts(text);
        if buckets.is_empty() {
            return Err(Error::EmptyText);
        }
        let d = self.embed_dim;
        let mut u = vec![0.0; d];
        for &(b, c) in &buckets {
            for (ui, w) in u.iter_mut().zip(&self.weights[b * d..(b + 1) * d]) {
                *ui += c * w;
            }
        }
        let norm = num::sqrt(u.iter().map(|x| x * x).sum());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("toy encoder", "degenerate projection"));
        }
        let unit = u.iter().map(|x| x / norm).collect();
        Ok(Encoded { buckets, norm, unit })
    }

    /// Unit-length embedding of `text`.
    pub fn encode(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.forward(text)?.unit)
    }

    /// Encodes `(id, text)` pairs into a store.
    pub fn embed_all<'a, I>(&self, items: I) -> Result<EmbeddingStore>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut store = EmbeddingStore::new(self.embed_dim)?;
        for (id, text) in items {
            store.insert(id, self.encode(text)?.into_iter().map(|x| x as f32).collect())?;
        }
        Ok(store)
    }

    /// Accumulates `d loss / d unit` into the weight gradient.
    fn backward(&self, enc: &Encoded, g_unit: &[f64], grad: &mut [f64]) {
        let d = self.embed_dim;
        let proj: f64 = g_unit.iter().zip(&enc.unit).map(|(g, e)| g * e).sum();
        let g_u: Vec<f64> = g_unit.iter().zip(&enc.unit).map(|(g, e)| (g - proj * e) / enc.norm).collect();
        for &(b, c) in &enc.buckets {
            for (gw, gu) in grad[b * d..(b + 1) * d].iter_mut().zip(&g_u) {
                *gw += c * gu;
            }
        }
    }
}

/// Mean InfoNCE loss of one batch and its gradient with respect to every
/// encoder weight.
pub fn batch_loss_and_grad(
    enc: &ToyEncoder,
    batch: &[&Triplet],
    in_batch_negatives: bool,
    temperature: f64,
) -> Result<(f64, Vec<f64>)> {
    let has_neg = batch.iter().all(|t| t.negative.is_some());
    let queries: Vec<Encoded> = batch.iter().map(|t| enc.forward(&t.query)).collect::<Result<_>>()?;
    let positives: Vec<Encoded> = batch.iter().map(|t| enc.forward(&t.positive)).collect::<Result<_>>()?;
    let negatives: Vec<Encoded> = if has_neg {
        batch.iter().map(|t| enc.forward(t.negative.as_deref().unwrap_or_default())).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let target = |c: Candidate| match c {
        Candidate::Positive(j) => &positives[j],
        Candidate::Negative(j) => &negatives[j],
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let pool = batching::candidate_pool(batch.len(), has_neg, in_batch_negatives, |i, c| {
        dot(&queries[i].unit, &target(c).unit)
    });
    let nce = batching::infonce_loss(&pool.rows, &pool.labels, temperature)?;

    let d = enc.embed_dim;
    let mut g_q = vec![vec![0.0; d]; batch.len()];
    let mut g_p = vec![vec![0.0; d]; batch.len()];
    let mut g_n = vec![vec![0.0; d]; negatives.len()];
    for (i, (cols, grow)) in pool.columns.iter().zip(&nce.grad).enumerate() {
        for (c, g) in cols.iter().zip(grow) {
            let t = target(*c);
            for (acc, u) in g_q[i].iter_mut().zip(&t.unit) {
                *acc += g * u;
            }
            let slot = match *c {
                Candidate::Positive(j) => &mut g_p[j],
                Candidate::Negative(j) => &mut g_n[j],
            };
            for (acc, u) in slot.iter_mut().zip(&queries[i].unit) {
                *acc += g * u;
            }
        }
    }
    let mut grad = vec![0.0; enc.weights.len()];
    for (e, g) in queries.iter().zip(&g_q).chain(positives.iter().zip(&g_p)).chain(negatives.iter().zip(&g_n)) {
        enc.backward(e, g, &mut grad);
    }
    Ok((nce.loss, grad))
}

/// Gradient-descent trainer. On divergence the encoder and loss curve hold
/// the state before the failing batch.
#[derive(Debug, Clone)]
pub struct ToyTrainer {
    pub encoder: ToyEncoder,
    pub config: TrainingConfig,
    pub losses: Vec<f64>,
}

impl ToyTrainer {
    pub fn new(encoder: ToyEncoder, config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        Ok(ToyTrainer { encoder, config, losses: Vec::new() })
    }

    pub fn run(&mut self, data: &[Triplet]) -> Result<()> {
        let bs = self.config.batch_size;
        if data.len() < 4 * bs {
            return Err(Error::invalid("toy training", format!("{} items, need at least {}", data.len(), 4 * bs)));
        }
        let category = data[0].category;
        if data.iter().any(|t| t.category != category) {
            return Err(Error::invalid("toy training", "mixed categories"));
        }
        let source = TrainingSource::Synthetic(category);
        let mix: BTreeMap<TrainingSource, usize> = [(source, data.len())].into_iter().collect();
        let total = batching::batches_per_epoch(&mix, bs) * self.config.epochs;
        let mut step = 0;
        for epoch in 0..self.config.epochs {
            let mut r = rng::stream(self.config.seed, epoch as u64);
            for b in batching::build_epoch(&mix, &self.config, &mut r)? {
                let items: Vec<&Triplet> = b.items.iter().map(|&i| &data[i]).collect();
                let (loss, grad) =
                    batch_loss_and_grad(&self.encoder, &items, b.in_batch_negatives_enabled, self.config.temperature)?;
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::DivergenceDetected { batch: step });
                }
                let lr = self.config.learning_rate_at(step, total);
                let updated: Vec<f64> = self.encoder.weights.iter().zip(&grad).map(|(w, g)| w - lr * g).collect();
                if updated.iter().any(|w| !w.is_finite()) {
                    return Err(Error::DivergenceDetected { batch: step });
                }
                self.encoder.weights = updated;
                self.losses.push(loss);
                step += 1;
            }
        }
        Ok(())
    }
}

/// Trains a copy of `encoder`; returns it with the per-batch loss curve.
pub fn train_toy(encoder: ToyEncoder, data: &[Triplet], cfg: &TrainingConfig) -> Result<(ToyEncoder, Vec<f64>)> {
    let mut t = ToyTrainer::new(encoder, cfg.clone())?;
    t.run(data)?;
    Ok((t.encoder, t.losses))
}

/// Shape of the synthetic separable task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub words_per_topic: usize,
    pub query_words: usize,
    pub filler_words: usize,
    pub train_items: usize,
    pub heldout_queries_per_topic: usize,
    pub distractors_per_topic: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            topics: 8,
            words_per_topic: 16,
            query_words: 6,
            filler_words: 2,
            train_items: 512,
            heldout_queries_per_topic: 5,
            distractors_per_topic: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub train: Vec<Triplet>,
    pub heldout: RetrievalCollection,
}

struct Generator<'a> {
    spec: &'a SyntheticSpec,
    r: rng::Rng,
}

impl Generator<'_> {
    fn indices(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.r.gen_range(0..self.spec.words_per_topic)).collect()
    }

    fn words(prefix: char, topic: usize, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|j| format!("{prefix}{topic}x{j}")).collect()
    }

    /// A query and the document it was written for.
    fn pair(&mut self, topic: usize) -> (String, String) {
        let idx = self.indices(self.spec.query_words);
        let filler = self.indices(self.spec.filler_words);
        let mut doc = Self::words('d', topic, &idx);
        doc.extend(Self::words('d', topic, &filler));
        doc.shuffle(&mut self.r);
        (Self::words('q', topic, &idx).join(" "), doc.join(" "))
    }

    fn doc(&mut self, topic: usize) -> String {
        let idx = self.indices(self.spec.query_words + self.spec.filler_words);
        Self::words('d', topic, &idx).join(" ")
    }
}

/// Every topic owns a query vocabulary and a disjoint document vocabulary;
/// word `j` of a query reappears as document word `j` in its positive. An
/// untrained encoder therefore sees no overlap, while a trained one can
/// learn the word correspondence. Held-out queries are judged against their
/// own paired document among same-topic distractors and other pairs.
pub fn synthetic_task(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticTask> {
    if spec.topics < 2 || spec.words_per_topic == 0 || spec.query_words == 0 {
        return Err(Error::invalid("synthetic task", "need at least 2 topics and nonempty queries"));
    }
    let mut g = Generator { spec, r: rng::seeded(seed) };
    let mut train = Vec::with_capacity(spec.train_items);
    for i in 0..spec.train_items {
        let topic = i % spec.topics;
        let other = (topic + g.r.gen_range(1..spec.topics)) % spec.topics;
        let (query, positive) = g.pair(topic);
        train.push(Triplet {
            id: format!("toy-{i:05}"),
            category: Category::ShortLong,
            query,
            positive,
            negative: Some(g.doc(other)),
            sts: None,
            source: Source::Synthetic,
            meta: BTreeMap::new(),
        });
    }
    train.shuffle(&mut g.r);
    let mut heldout = RetrievalCollection::default();
    for topic in 0..spec.topics {
        for j in 0..spec.heldout_queries_per_topic {
            let (qid, did) = (format!("t{topic}-q{j}"), format!("t{topic}-d{j}"));
            let (query, doc) = g.pair(topic);
            heldout.queries.insert(qid.clone(), query);
            heldout.corpus.insert(did.clone(), doc);
            heldout.qrels.insert(qid, [(did, 1)].into_iter().collect());
        }
        for j in 0..spec.distractors_per_topic {
            let doc = g.doc(topic);
            heldout.corpus.insert(format!("t{topic}-x{j}"), doc);
        }
    }
    Ok(SyntheticTask { train, heldout })
}

/// Held-out nDCG@10 (as a fraction) of `enc` on a retrieval collection.
pub fn heldout_ndcg10(enc: &ToyEncoder, coll: &RetrievalCollection) -> Result<f64> {
    let q = enc.embed_all(coll.queries.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let d = enc.embed_all(coll.corpus.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    Ok(crate::eval::retrieval::eval_retrieval(&q, &d, coll)?.ndcg_at_10 / 100.0)
}

/// Training settings used for the synthetic task.
pub fn toy_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        batch_size: 32,
        temperature: 0.05,
        learning_rate: 1.0,
        warmup_ratio: 0.1,
        epochs: 3,
        scheduler: batching::Scheduler::Constant,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_invariant_and_unit_norm() {
        let enc = ToyEncoder::with_defaults(3);
        assert_eq!(enc.encode("a a b").unwrap(), enc.encode("a b a").unwrap());
        assert_eq!(enc.encode("Hello World").unwrap(), enc.encode("hello   world").unwrap());
        let n: f64 = enc.encode("some text here").unwrap().iter().map(|x| x * x).sum();
        assert!((n.sqrt() - 1.0).abs() < 1e-6);
        assert_eq!(enc.encode("  \t "), Err(Error::EmptyText));
    }

    #[test]
    fn synthetic_task_shape() {
        let t = synthetic_task(&SyntheticSpec::default(), 1).unwrap();
        assert_eq!(t.train.len(), 512);
        assert_eq!(t.heldout.queries.len(), 40);
        assert_eq!(t.heldout.corpus.len(), 80);
        t.heldout.validate().unwrap();
        for tr in &t.train {
            tr.validate().unwrap();
        }
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let spec = SyntheticSpec { train_items: 64, ..SyntheticSpec::default() };
        let task = synthetic_task(&spec, 2).unwrap();
        let enc = ToyEncoder::new(256, 8, 5).unwrap();
        let cfg = TrainingConfig { batch_size: 16, learning_rate: 0.0, ..toy_config(1) };
        let (trained, losses) = train_toy(enc.clone(), &task.train, &cfg).unwrap();
        assert_eq!(trained, enc);
        assert_eq!(losses.len(), 12);
    }

    #[test]
    fn too_little_data_rejected() {
        let spec = SyntheticSpec { train_items: 100, ..SyntheticSpec::default() };
        let task = synthetic_task(&spec, 2).unwrap();
        assert!(train_toy(ToyEncoder::new(64, 8, 0).unwrap(), &task.train, &toy_config(0)).is_err());
    }
}
