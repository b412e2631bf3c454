//! Few-shot classification (logistic regression) and multilabel
//! classification (cosine k-NN), both averaged over seeded experiments.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::logreg::{LogRegConfig, LogisticRegression};
use super::metrics;
use super::{dot64, unit_vector};
use crate::error::{Error, Result};
use crate::num;
use crate::rng;
use crate::types::{EmbeddingStore, LabeledExample};

/// Per-experiment training sizes, cycled over experiments.
pub const DEFAULT_SIZES: [usize; 5] = [8, 16, 32, 64, 128];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassificationProtocol {
    pub n_experiments: usize,
    /// Examples per label in each experiment's training subsample.
    pub sizes: Vec<usize>,
    pub regularization_c: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ClassificationProtocol {
    fn default() -> Self {
        ClassificationProtocol {
            n_experiments: 10,
            sizes: DEFAULT_SIZES.to_vec(),
            regularization_c: 1.0,
            max_iter: 100,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultilabelProtocol {
    pub n_experiments: usize,
    pub sizes: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl Default for MultilabelProtocol {
    fn default() -> Self {
        MultilabelProtocol { n_experiments: 10, sizes: DEFAULT_SIZES.to_vec(), k: 5, seed: 42 }
    }
}

/// Main score (×100) and the per-experiment scores it averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentScores {
    pub main: f64,
    pub experiments: Vec<f64>,
}

fn check_protocol(n_experiments: usize, sizes: &[usize]) -> Result<()> {
    if n_experiments == 0 || sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid("protocol", "need at least one experiment and positive sizes"));
    }
    Ok(())
}

fn raw_vector(store: &EmbeddingStore, id: &str) -> Result<Vec<f64>> {
    Ok(store.require(id)?.iter().map(|x| f64::from(*x)).collect())
}

fn validate_all(examples: &[LabeledExample]) -> Result<()> {
    examples.iter().try_for_each(LabeledExample::validate)
}

/// Logistic-regression probe: for each experiment draw `size` training
/// examples per label, fit, and score macro F1 on the full test set.
pub fn eval_classification(
    store: &EmbeddingStore,
    train: &[LabeledExample],
    test: &[LabeledExample],
    protocol: &ClassificationProtocol,
) -> Result<ExperimentScores> {
    check_protocol(protocol.n_experiments, &protocol.sizes)?;
    validate_all(train)?;
    validate_all(test)?;
    if test.is_empty() {
        return Err(Error::EmptyInput("empty test set"));
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in train.iter().enumerate() {
        by_label.entry(e.labels[0].as_str()).or_default().push(i);
    }
    if by_label.len() < 2 {
        return Err(Error::DegenerateLabels(alloc::format!("{} class(es) in training data", by_label.len())));
    }
    let classes: Vec<&str> = by_label.keys().copied().collect();
    let class_index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let train_x: Vec<Vec<f64>> = train.iter().map(|e| raw_vector(store, &e.id)).collect::<Result<_>>()?;
    let test_x: Vec<Vec<f64>> = test.iter().map(|e| raw_vector(store, &e.id)).collect::<Result<_>>()?;
    let gold: Vec<&str> = test.iter().map(|e| e.labels[0].as_str()).collect();
    let cfg = LogRegConfig { c: protocol.regularization_c, max_iter: protocol.max_iter, ..Default::default() };

    let mut experiments = Vec::with_capacity(protocol.n_experiments);
    for e in 0..protocol.n_experiments {
        let size = protocol.sizes[e % protocol.sizes.len()];
        let mut r = rng::stream(protocol.seed, e as u64);
        let mut picked = Vec::new();
        for members in by_label.values() {
            let mut m = members.clone();
            m.shuffle(&mut r);
            picked.extend(m.into_iter().take(size));
        }
        picked.sort_unstable();
        let x: Vec<Vec<f64>> = picked.iter().map(|&i| train_x[i].clone()).collect();
        let y: Vec<usize> = picked.iter().map(|&i| class_index[train[i].labels[0].as_str()]).collect();
        let model = LogisticRegression::fit(&x, &y, classes.len(), &cfg);
        let pred: Vec<&str> = test_x.iter().map(|v| classes[model.predict(v)]).collect();
        experiments.push(100.0 * metrics::f1_macro(&gold, &pred));
    }
    Ok(ExperimentScores { main: num::mean(&experiments), experiments })
}

/// Per-label undersampling: walk the shuffled training set and keep an
/// example while any of its labels is below `size`.
fn undersample_per_label(train: &[LabeledExample], size: usize, r: &mut rng::Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(r);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut picked = Vec::new();
    for i in order {
        let labels = &train[i].labels;
        if labels.iter().any(|l| counts.get(l.as_str()).copied().unwrap_or(0) < size) {
            for l in labels {
                *counts.entry(l.as_str()).or_default() += 1;
            }
            picked.push(i);
        }
    }
    picked.sort_unstable();
    picked
}

/// Labels voted for by a strict majority of the `k` nearest neighbours
/// (cosine, ties by ascending id).
pub fn knn_predict<'a>(
    query: &[f64],
    neighbours: &[(&'a str, &'a [f64], &'a [String])],
    k: usize,
) -> BTreeSet<&'a str> {
    let mut sims: Vec<(usize, f64)> =
        neighbours.iter().enumerate().map(|(i, (_, v, _))| (i, dot64(query, v))).collect();
    sims.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        core::cmp::Ordering::Equal => neighbours[a.0].0.cmp(neighbours[b.0].0),
        o => o,
    });
    let used = k.min(sims.len());
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, _) in sims.iter().take(used) {
        for l in neighbours[*i].2 {
            *votes.entry(l.as_str()).or_default() += 1;
        }
    }
    votes.into_iter().filter(|(_, v)| 2 * v > used).map(|(l, _)| l).collect()
}

/// Cosine k-NN multilabel probe scored by macro F1 over training labels.
pub fn eval_multilabel(
    store: &EmbeddingStore,
    train: &[LabeledExample],
    test: &[LabeledExample],
    protocol: &MultilabelProtocol,
) -> Result<ExperimentScores> {
    check_protocol(protocol.n_experiments, &protocol.sizes)?;
    if protocol.k == 0 {
        return Err(Error::invalid("protocol", "k must be positive"));
    }
    validate_all(train)?;
    validate_all(test)?;
    if test.is_empty() || train.is_empty() {
        return Err(Error::EmptyInput("empty train or test set"));
    }
    let labels: BTreeSet<&str> = train.iter().flat_map(|e| e.labels.iter().map(String::as_str)).collect();
    if let Some(missing) = test.iter().flat_map(|e| e.labels.iter()).find(|l| !labels.contains(l.as_str())) {
        return Err(Error::LabelMissingInTrain(missing.clone()));
    }
    let labels: Vec<&str> = labels.into_iter().collect();
    let train_v: Vec<Vec<f64>> = train.iter().map(|e| unit_vector(store, &e.id)).collect::<Result<_>>()?;
    let test_v: Vec<Vec<f64>> = test.iter().map(|e| unit_vector(store, &e.id)).collect::<Result<_>>()?;
    let gold: Vec<BTreeSet<&str>> = test.iter().map(|e| e.labels.iter().map(String::as_str).collect()).collect();

    let mut experiments = Vec::with_capacity(protocol.n_experiments);
    for e in 0..protocol.n_experiments {
        let size = protocol.sizes[e % protocol.sizes.len()];
        let mut r = rng::stream(protocol.seed, e as u64);
        let picked = undersample_per_label(train, size, &mut r);
        let neighbours: Vec<(&str, &[f64], &[String])> = picked
            .iter()
            .map(|&i| (train[i].id.as_str(), train_v[i].as_slice(), train[i].labels.as_slice()))
            .collect();
        let pred: Vec<BTreeSet<&str>> = test_v.iter().map(|v| knn_predict(v, &neighbours, protocol.k)).collect();
        experiments.push(100.0 * metrics::f1_macro_multilabel(&labels, &gold, &pred));
    }
    Ok(ExperimentScores { main: num::mean(&experiments), experiments })
}
