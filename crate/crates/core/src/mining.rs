//! Hard-negative mining with a standard-deviation ignore margin.
//!
//! For one query the corpus is ranked by teacher score; σ is the population
//! standard deviation of the top-N scores. Candidates scoring strictly
//! between `S(d+) - σ` and `S(d+)` are skipped as likely false negatives.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningParams {
    pub top_n_for_sigma: usize,
    pub candidate_window_k: usize,
    pub negatives_per_query: usize,
    pub seed: u64,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams { top_n_for_sigma: 1000, candidate_window_k: 100, negatives_per_query: 1, seed: 0 }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<()> {
        if self.top_n_for_sigma == 0 || self.candidate_window_k == 0 || self.negatives_per_query == 0 {
            return Err(Error::invalid("mining params", "all counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedNegatives {
    pub query_id: String,
    pub positive: String,
    pub sigma: f64,
    pub eligible: Vec<String>,
    pub sampled: Vec<String>,
}

/// Descending score, ties by ascending doc id.
pub fn rank_descending(scores: &BTreeMap<String, f64>) -> Vec<(&str, f64)> {
    let mut ranked: Vec<(&str, f64)> = scores.iter().map(|(d, s)| (d.as_str(), *s)).collect();
    ranked.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(b.0),
        o => o,
    });
    ranked
}

/// Population standard deviation.
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = num::mean(xs);
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    num::sqrt(var)
}

/// Mines negatives for `positive` among `scores` (doc id → teacher score).
///
/// `also_relevant` lists other judged-relevant docs of the query; they are
/// never eligible. Eligible docs rank inside the top `candidate_window_k`,
/// below the positive, with score `<= S(d+) - σ`.
pub fn mine_hard_negatives<R: Rng + ?Sized>(
    query_id: &str,
    scores: &BTreeMap<String, f64>,
    positive: &str,
    also_relevant: &BTreeSet<String>,
    params: &MiningParams,
    rng: &mut R,
) -> Result<MinedNegatives> {
    params.validate()?;
    if let Some((doc, _)) = scores.iter().find(|(_, s)| !s.is_finite()) {
        return Err(Error::invalid("teacher scores", alloc::format!("non-finite score for {doc}")));
    }
    let pos_score = *scores.get(positive).ok_or_else(|| Error::PositiveMissing(positive.to_string()))?;

    let ranked = rank_descending(scores);
    let top: Vec<f64> = ranked.iter().take(params.top_n_for_sigma).map(|(_, s)| *s).collect();
    let sigma = population_std(&top);
    let threshold = pos_score - sigma;

    let pos_rank = ranked.iter().position(|(d, _)| *d == positive).expect("positive is ranked");
    let eligible: Vec<String> = ranked
        .iter()
        .enumerate()
        .take(params.candidate_window_k)
        .filter(|(rank, (doc, score))| {
            *rank > pos_rank && *score <= threshold && !also_relevant.contains(*doc)
        })
        .map(|(_, (doc, _))| doc.to_string())
        .collect();

    if eligible.is_empty() {
        return Err(Error::EmptyEligible(positive.to_string()));
    }
    let amount = params.negatives_per_query.min(eligible.len());
    let sampled = index::sample(rng, eligible.len(), amount)
        .into_iter()
        .map(|i| eligible[i].clone())
        .collect();

    Ok(MinedNegatives { query_id: query_id.to_string(), positive: positive.to_string(), sigma, eligible, sampled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(d, s)| (String::from(*d), *s)).collect()
    }

    #[test]
    fn hand_example() {
        let sc = scores(&[("d+", 0.9), ("a", 0.85), ("b", 0.7), ("c", 0.5)]);
        let mut r = rng::seeded(1);
        let m = mine_hard_negatives("q", &sc, "d+", &BTreeSet::new(), &MiningParams::default(), &mut r).unwrap();
        assert!((m.sigma - 0.155_623_9).abs() < 1e-6, "{}", m.sigma);
        assert_eq!(m.eligible, vec!["b", "c"]);
        assert_eq!(m.sampled.len(), 1);
        assert!(m.eligible.contains(&m.sampled[0]));
        let again = mine_hard_negatives("q", &sc, "d+", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(1))
            .unwrap();
        assert_eq!(again.sampled, m.sampled);
    }

    #[test]
    fn equal_scores_take_everything_below_positive() {
        let sc = scores(&[("a", 0.5), ("b", 0.5), ("c", 0.5), ("d", 0.5)]);
        let m = mine_hard_negatives("q", &sc, "b", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0))
            .unwrap();
        assert_eq!(m.sigma, 0.0);
        assert_eq!(m.eligible, vec!["c", "d"]);
    }

    #[test]
    fn only_positive() {
        let sc = scores(&[("d+", 0.9)]);
        let r = mine_hard_negatives("q", &sc, "d+", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0));
        assert_eq!(r, Err(Error::EmptyEligible("d+".into())));
    }

    #[test]
    fn missing_positive() {
        let sc = scores(&[("a", 0.9)]);
        let r = mine_hard_negatives("q", &sc, "zz", &BTreeSet::new(), &MiningParams::default(), &mut rng::seeded(0));
        assert_eq!(r, Err(Error::PositiveMissing("zz".into())));
    }

    #[test]
    fn other_relevant_docs_and_window() {
        let sc = scores(&[("p", 1.0), ("x", 0.2), ("y", 0.1), ("z", 0.0)]);
        let rel: BTreeSet<String> = [String::from("x")].into();
        let params = MiningParams { candidate_window_k: 3, negatives_per_query: 5, ..Default::default() };
        let m = mine_hard_negatives("q", &sc, "p", &rel, &params, &mut rng::seeded(0)).unwrap();
        // window of 3 covers p, x, y; x is judged relevant
        assert_eq!(m.eligible, vec!["y"]);
        assert_eq!(m.sampled, vec!["y"]);
    }

    #[test]
    fn sigma_uses_top_n_only() {
        let sc = scores(&[("p", 1.0), ("a", 0.0), ("b", 0.0), ("c", 0.0)]);
        let params = MiningParams { top_n_for_sigma: 2, ..Default::default() };
        let m = mine_hard_negatives("q", &sc, "p", &BTreeSet::new(), &params, &mut rng::seeded(0)).unwrap();
        assert!((m.sigma - 0.5).abs() < 1e-12);
    }
}
