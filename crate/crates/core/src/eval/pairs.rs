//! Pair classification (max AP over similarity channels) and STS
//! (Spearman of cosine similarity against gold scores).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::metrics;
use crate::error::{Error, Result};
use crate::num;
use crate::types::EmbeddingStore;

/// Average precision (×100) per similarity channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairChannels {
    pub cosine: f64,
    pub dot: f64,
    pub euclidean: f64,
    pub manhattan: f64,
}

impl PairChannels {
    pub fn main(&self) -> f64 {
        self.cosine.max(self.dot).max(self.euclidean).max(self.manhattan)
    }
}

/// Scores every pair under cosine, dot product, negative Euclidean and
/// negative Manhattan distance.
pub fn eval_pair_classification(store: &EmbeddingStore, pairs: &[(String, String, bool)]) -> Result<PairChannels> {
    let positives = pairs.iter().filter(|p| p.2).count();
    if positives == 0 || positives == pairs.len() {
        return Err(Error::DegenerateLabels("pair labels must contain both classes".into()));
    }
    let mut channels: [Vec<f64>; 4] = Default::default();
    let mut labels = Vec::with_capacity(pairs.len());
    for (a, b, label) in pairs {
        let va = store.require(a)?;
        let vb = store.require(b)?;
        channels[0].push(num::cosine(va, vb));
        channels[1].push(num::dot(va, vb));
        let (mut euc, mut man) = (0.0, 0.0);
        for (x, y) in va.iter().zip(vb) {
            let d = f64::from(*x) - f64::from(*y);
            euc += d * d;
            man += d.abs();
        }
        channels[2].push(-num::sqrt(euc));
        channels[3].push(-man);
        labels.push(*label);
    }
    let ap = |scores: &[f64]| 100.0 * metrics::average_precision_scores(scores, &labels);
    Ok(PairChannels {
        cosine: ap(&channels[0]),
        dot: ap(&channels[1]),
        euclidean: ap(&channels[2]),
        manhattan: ap(&channels[3]),
    })
}

/// Spearman (×100) between pair cosine similarity and gold scores.
pub fn eval_sts(store: &EmbeddingStore, pairs: &[(String, String, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateGold(alloc::format!("{} pairs, need at least 3", pairs.len())));
    }
    let gold: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    if gold.iter().all(|g| *g == gold[0]) {
        return Err(Error::DegenerateGold("all gold scores equal".into()));
    }
    let sims: Vec<f64> = pairs
        .iter()
        .map(|(a, b, _)| Ok(num::cosine(store.require(a)?, store.require(b)?)))
        .collect::<Result<_>>()?;
    Ok(100.0 * metrics::spearman(&sims, &gold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn store(items: &[(&str, [f32; 2])]) -> EmbeddingStore {
        let mut s = EmbeddingStore::new(2).unwrap();
        for (id, v) in items {
            s.insert(*id, v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn perfect_separation() {
        let s = store(&[("a", [1.0, 0.0]), ("b", [0.9, 0.1]), ("c", [0.0, 1.0])]);
        let pairs = vec![("a".to_string(), "b".to_string(), true), ("a".to_string(), "c".to_string(), false)];
        let ch = eval_pair_classification(&s, &pairs).unwrap();
        assert_eq!(ch.cosine, 100.0);
        assert_eq!(ch.main(), 100.0);
    }

    #[test]
    fn tied_similarities_give_positive_rate() {
        let s = store(&[("a", [1.0, 0.0]), ("b", [1.0, 0.0])]);
        let pairs: Vec<_> = (0..5).map(|i| ("a".to_string(), "b".to_string(), i < 2)).collect();
        let ch = eval_pair_classification(&s, &pairs).unwrap();
        assert!((ch.cosine - 40.0).abs() < 1e-9);
    }

    #[test]
    fn max_over_channels() {
        let ch = PairChannels { cosine: 80.0, dot: 85.0, euclidean: 70.0, manhattan: 72.0 };
        assert_eq!(ch.main(), 85.0);
    }

    #[test]
    fn sts_monotone_and_reversed() {
        let s = store(&[("x", [1.0, 0.0]), ("p1", [0.0, 1.0]), ("p2", [0.5, 0.5]), ("p3", [1.0, 0.1])]);
        let up = vec![
            ("x".to_string(), "p1".to_string(), 1.0),
            ("x".to_string(), "p2".to_string(), 2.0),
            ("x".to_string(), "p3".to_string(), 3.0),
        ];
        assert!((eval_sts(&s, &up).unwrap() - 100.0).abs() < 1e-9);
        let down: Vec<_> = up.iter().map(|(a, b, g)| (a.clone(), b.clone(), -g)).collect();
        assert!((eval_sts(&s, &down).unwrap() + 100.0).abs() < 1e-9);
        let flat: Vec<_> = up.iter().map(|(a, b, _)| (a.clone(), b.clone(), 1.0)).collect();
        assert!(matches!(eval_sts(&s, &flat), Err(Error::DegenerateGold(_))));
    }
}
