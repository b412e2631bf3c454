//! k-means (k-means++ seeding, restarts) scored by V-measure.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics;
use crate::error::{Error, Result};
use crate::num;
use crate::rng;
use crate::types::EmbeddingStore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringProtocol {
    pub restarts: usize,
    pub max_iter: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ClusteringProtocol {
    fn default() -> Self {
        ClusteringProtocol { restarts: 10, max_iter: 300, repetitions: 5, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, r: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[r.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = r.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            r.gen_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansResult {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = (0..points.len())
                    .max_by(|&i, &j| {
                        sq_dist(&points[i], &centroids[assignments[i]])
                            .total_cmp(&sq_dist(&points[j], &centroids[assignments[j]]))
                    })
                    .expect("points nonempty");
                centroids[c] = points[far].clone();
            } else {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = assignments.iter().zip(points).map(|(&a, p)| sq_dist(p, &centroids[a])).sum();
    KMeansResult { assignments, centroids, inertia }
}

/// Best-of-`restarts` k-means by inertia.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, restarts: usize, max_iter: usize, r: &mut R) -> Result<KMeansResult> {
    if points.is_empty() || k == 0 || k > points.len() {
        return Err(Error::invalid("k-means", alloc::format!("k = {k} for {} points", points.len())));
    }
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let init = plus_plus_init(points, k, r);
        let run = lloyd(points, init, max_iter.max(1));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Clusters `items` (id, gold label) into as many clusters as gold labels
/// and reports the mean V-measure over seeded repetitions, ×100.
pub fn eval_clustering(
    store: &EmbeddingStore,
    items: &[(String, String)],
    protocol: &ClusteringProtocol,
) -> Result<f64> {
    let mut gold_labels: Vec<&str> = items.iter().map(|(_, l)| l.as_str()).collect();
    gold_labels.sort_unstable();
    gold_labels.dedup();
    if gold_labels.len() < 2 {
        return Err(Error::DegenerateLabels(alloc::format!("{} gold label(s)", gold_labels.len())));
    }
    let points: Vec<Vec<f64>> = items
        .iter()
        .map(|(id, _)| Ok(store.require(id)?.iter().map(|x| f64::from(*x)).collect()))
        .collect::<Result<_>>()?;
    let gold: Vec<&str> = items.iter().map(|(_, l)| l.as_str()).collect();
    let mut scores = Vec::with_capacity(protocol.repetitions);
    for rep in 0..protocol.repetitions.max(1) {
        let mut r = rng::stream(protocol.seed, rep as u64);
        let result = kmeans(&points, gold_labels.len(), protocol.restarts, protocol.max_iter, &mut r)?;
        scores.push(100.0 * metrics::v_measure(&gold, &result.assignments).v_measure);
    }
    Ok(num::mean(&scores))
}
