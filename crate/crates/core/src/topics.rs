//! Two-label conditional topic distribution.
//!
//! Fitted from classified query logs on the two highest-scored labels of
//! each query: `P(T1)` over first labels and `P(T2 | T1)` over second labels.
//! Queries with a single label put their mass on "no second topic".

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// A classified query with its labels sorted by descending score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub query: String,
    pub labels: Vec<(String, f64)>,
}

impl LabeledQuery {
    /// Builds a query, ordering labels by descending score with ties broken
    /// by ascending topic name.
    pub fn new(query: impl Into<String>, mut labels: Vec<(String, f64)>) -> Result<Self> {
        for (topic, score) in &labels {
            if !(0.0..=1.0).contains(score) {
                return Err(Error::invalid("labeled query", format!("score {score} for {topic} outside [0, 1]")));
            }
        }
        labels.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(LabeledQuery { query: query.into(), labels })
    }

    fn top_two(&self) -> Option<(&str, Option<&str>)> {
        let first = self.labels.first()?;
        Some((first.0.as_str(), self.labels.get(1).map(|l| l.0.as_str())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub taxonomy: Vec<String>,
    pub p_t1: BTreeMap<String, f64>,
    pub p_t2_given_t1: BTreeMap<String, BTreeMap<String, f64>>,
    pub singleton_mass: BTreeMap<String, f64>,
}

/// Fits the distribution by unweighted counting of the top two labels.
pub fn fit_topic_distribution(samples: &[LabeledQuery]) -> Result<TopicDistribution> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no labeled queries"));
    }
    let mut first_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut pair_counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut singles: BTreeMap<&str, u64> = BTreeMap::new();
    let mut taxonomy: BTreeSet<&str> = BTreeSet::new();

    for s in samples {
        let (t1, t2) = s
            .top_two()
            .ok_or_else(|| Error::invalid("labeled query", format!("query {:?} has no labels", s.query)))?;
        *first_counts.entry(t1).or_default() += 1;
        taxonomy.insert(t1);
        match t2 {
            Some(t2) => {
                *pair_counts.entry(t1).or_default().entry(t2).or_default() += 1;
                taxonomy.insert(t2);
            }
            None => *singles.entry(t1).or_default() += 1,
        }
    }

    let total = samples.len() as f64;
    let p_t1 = first_counts.iter().map(|(t, c)| (String::from(*t), *c as f64 / total)).collect();
    let mut p_t2_given_t1 = BTreeMap::new();
    let mut singleton_mass = BTreeMap::new();
    for (t1, n) in &first_counts {
        let n = *n as f64;
        let cond: BTreeMap<String, f64> = pair_counts
            .get(t1)
            .map(|m| m.iter().map(|(t2, c)| (String::from(*t2), *c as f64 / n)).collect())
            .unwrap_or_default();
        p_t2_given_t1.insert(String::from(*t1), cond);
        singleton_mass.insert(String::from(*t1), singles.get(t1).copied().unwrap_or(0) as f64 / n);
    }

    Ok(TopicDistribution {
        taxonomy: taxonomy.into_iter().map(String::from).collect(),
        p_t1,
        p_t2_given_t1,
        singleton_mass,
    })
}

impl TopicDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::invalid("topic distribution", reason);
        if self.p_t1.is_empty() {
            return Err(bad("empty P(T1)".into()));
        }
        let all = self
            .p_t1
            .values()
            .chain(self.singleton_mass.values())
            .chain(self.p_t2_given_t1.values().flat_map(|m| m.values()));
        if all.clone().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(bad("negative or non-finite probability".into()));
        }
        let sum: f64 = self.p_t1.values().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(bad(format!("P(T1) sums to {sum}")));
        }
        for t1 in self.p_t1.keys() {
            let cond: f64 = self.p_t2_given_t1.get(t1).map(|m| m.values().sum()).unwrap_or(0.0);
            let single = self.singleton_mass.get(t1).copied().unwrap_or(0.0);
            if (cond + single - 1.0).abs() > SUM_TOLERANCE {
                return Err(bad(format!("P(T2|{t1}) plus singleton mass sums to {}", cond + single)));
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> Result<TopicSampler> {
        TopicSampler::new(self)
    }
}

/// A sampled topic seed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopicPair {
    pub first: String,
    pub second: Option<String>,
}

/// Precomputed alias-free categorical samplers for a distribution.
#[derive(Debug, Clone)]
pub struct TopicSampler {
    first: Vec<String>,
    first_index: WeightedIndex<f64>,
    // Per first topic: candidate seconds (None = singleton) and their weights.
    second: Vec<(Vec<Option<String>>, WeightedIndex<f64>)>,
}

impl TopicSampler {
    pub fn new(dist: &TopicDistribution) -> Result<Self> {
        dist.validate()?;
        let first: Vec<String> = dist.p_t1.keys().cloned().collect();
        let first_index = WeightedIndex::new(dist.p_t1.values().copied())
            .map_err(|e| Error::invalid("topic distribution", format!("{e}")))?;
        let mut second = Vec::with_capacity(first.len());
        for t1 in &first {
            let mut options = Vec::new();
            let mut weights = Vec::new();
            let single = dist.singleton_mass.get(t1).copied().unwrap_or(0.0);
            if single > 0.0 {
                options.push(None);
                weights.push(single);
            }
            if let Some(cond) = dist.p_t2_given_t1.get(t1) {
                for (t2, p) in cond.iter().filter(|(_, p)| **p > 0.0) {
                    options.push(Some(t2.clone()));
                    weights.push(*p);
                }
            }
            let index = WeightedIndex::new(weights)
                .map_err(|e| Error::invalid("topic distribution", format!("{t1}: {e}")))?;
            second.push((options, index));
        }
        Ok(TopicSampler { first, first_index, second })
    }

    /// Draws T1 from P(T1), then "no second topic" with the singleton mass of
    /// T1, else T2 from P(T2 | T1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TopicPair {
        let i = self.first_index.sample(rng);
        let (options, index) = &self.second[i];
        TopicPair { first: self.first[i].clone(), second: options[index.sample(rng)].clone() }
    }
}

/// One topic draw; see [`TopicSampler::sample`].
pub fn sample_topic_pair<R: Rng + ?Sized>(sampler: &TopicSampler, rng: &mut R) -> TopicPair {
    sampler.sample(rng)
}
