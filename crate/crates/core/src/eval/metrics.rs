//! Ranking, correlation, clustering and classification metrics.
//!
//! All functions return fractions in [0, 1] (Spearman in [-1, 1]); the task
//! evaluators scale to percentages.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::num;

/// nDCG@k with linear gain `rel / log2(rank + 1)`. `ranked_grades` are the
/// relevance grades of the ranked list; `all_grades` every judged grade of
/// the query. Returns 0 when no judged document is relevant.
pub fn ndcg_at_k(ranked_grades: &[u32], all_grades: &[u32], k: usize) -> f64 {
    let actual = dcg(ranked_grades.iter().copied(), k);
    let mut ideal = all_grades.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter(), k);
    if idcg == 0.0 {
        0.0
    } else {
        actual / idcg
    }
}

fn dcg(grades: impl Iterator<Item = u32>, k: usize) -> f64 {
    grades.take(k).enumerate().map(|(i, g)| f64::from(g) / num::log2(i as f64 + 2.0)).sum()
}

/// Fraction of relevant documents (grade > 0) found in the top k.
pub fn recall_at_k(ranked_grades: &[u32], n_relevant: usize, k: usize) -> f64 {
    if n_relevant == 0 {
        return 0.0;
    }
    ranked_grades.iter().take(k).filter(|g| **g > 0).count() as f64 / n_relevant as f64
}

/// Average precision of a ranked binary list: mean over positive positions
/// of precision at that rank. Zero when the list holds no positive.
pub fn average_precision_ranked(labels: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, _) in labels.iter().enumerate().filter(|(_, l)| **l) {
        hits += 1;
        sum += hits as f64 / (i + 1) as f64;
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// Average precision of scores against binary labels with tied scores
/// treated as one threshold: `Σ (R_t - R_{t-1}) P_t` over distinct
/// thresholds in descending order.
pub fn average_precision_scores(scores: &[f64], labels: &[bool]) -> f64 {
    let total_pos = labels.iter().filter(|l| **l).count();
    if total_pos == 0 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]].total_cmp(&threshold) == Ordering::Equal {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / total_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

/// Ranks starting at 1 with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]].total_cmp(&xs[order[i]]) == Ordering::Equal {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = num::mean(a);
    let mb = num::mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / num::sqrt(saa * sbb)
    }
}

/// Spearman rank correlation with average-rank ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|c| *c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * num::ln(p)
        })
        .sum()
}

/// Homogeneity, completeness and their harmonic mean (β = 1).
pub fn v_measure<A: Ord, B: Ord>(gold: &[A], pred: &[B]) -> VMeasure {
    assert_eq!(gold.len(), pred.len(), "label vectors differ in length");
    let n = gold.len() as f64;
    if gold.is_empty() {
        return VMeasure { homogeneity: 1.0, completeness: 1.0, v_measure: 1.0 };
    }
    let mut joint: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    let mut gold_counts: BTreeMap<&A, usize> = BTreeMap::new();
    let mut pred_counts: BTreeMap<&B, usize> = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        *joint.entry((g, p)).or_default() += 1;
        *gold_counts.entry(g).or_default() += 1;
        *pred_counts.entry(p).or_default() += 1;
    }
    let h_gold = entropy(gold_counts.values().copied(), n);
    let h_pred = entropy(pred_counts.values().copied(), n);
    // H(gold | pred) and H(pred | gold)
    let mut h_gold_given_pred = 0.0;
    let mut h_pred_given_gold = 0.0;
    for ((g, p), &c) in &joint {
        let c = c as f64;
        h_gold_given_pred -= c / n * num::ln(c / pred_counts[p] as f64);
        h_pred_given_gold -= c / n * num::ln(c / gold_counts[g] as f64);
    }
    let homogeneity = if h_gold == 0.0 { 1.0 } else { 1.0 - h_gold_given_pred / h_gold };
    let completeness = if h_pred == 0.0 { 1.0 } else { 1.0 - h_pred_given_gold / h_pred };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    VMeasure { homogeneity, completeness, v_measure: v }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Unweighted mean of per-class F1 over every class seen in either vector.
pub fn f1_macro<T: Ord>(gold: &[T], pred: &[T]) -> f64 {
    let classes: BTreeSet<&T> = gold.iter().chain(pred).collect();
    if classes.is_empty() {
        return 0.0;
    }
    let total: f64 = classes
        .iter()
        .map(|c| {
            let mut tp = 0;
            let mut fp = 0;
            let mut fn_ = 0;
            for (g, p) in gold.iter().zip(pred) {
                match (g == *c, p == *c) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
            f1(tp, fp, fn_)
        })
        .sum();
    total / classes.len() as f64
}

/// Macro F1 over `labels` for multi-label predictions.
pub fn f1_macro_multilabel<T: Ord>(labels: &[T], gold: &[BTreeSet<T>], pred: &[BTreeSet<T>]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let total: f64 = labels
        .iter()
        .map(|l| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (g, p) in gold.iter().zip(pred) {
                match (g.contains(l), p.contains(l)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
            f1(tp, fp, fn_)
        })
        .sum();
    total / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_ndcg_hand_example() {
        // qrels {d1: 2, d2: 1}, predicted order [d2, d1]
        let v = ndcg_at_k(&[1, 2], &[2, 1], 10);
        let dcg = 1.0 + 2.0 / libm::log2(3.0);
        let idcg = 2.0 + 1.0 / libm::log2(3.0);
        assert!((dcg - 2.26186).abs() < 1e-5);
        assert!((idcg - 2.63093).abs() < 1e-5);
        assert!((v * 100.0 - 85.97).abs() < 0.005);
        assert_eq!(ndcg_at_k(&[1, 0], &[1], 10), 1.0);
    }

    #[test]
    fn ap_examples() {
        assert!((average_precision_ranked(&[true, false, true]) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(average_precision_ranked(&[true, true, false]), 1.0);
        assert!((average_precision_ranked(&[false, false, false, true]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ap_scores_ties() {
        assert_eq!(average_precision_scores(&[0.9, 0.1], &[true, false]), 1.0);
        let p = average_precision_scores(&[0.5; 5], &[true, false, true, false, false]);
        assert!((p - 0.4).abs() < 1e-12);
    }

    #[test]
    fn spearman_examples() {
        let g = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&[0.1, 0.2, 0.3, 0.9], &g) - 1.0).abs() < 1e-12);
        assert!((spearman(&[0.9, 0.3, 0.2, 0.1], &g) + 1.0).abs() < 1e-12);
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_with_tie_matches_rank_formula() {
        // predictions tie on two items; gold untied
        let pred = [0.2, 0.5, 0.5, 0.1, 0.9];
        let gold = [2.0, 3.0, 1.0, 4.0, 5.0];
        // ranks pred: [2, 3.5, 3.5, 1, 5], gold: [2, 3, 1, 4, 5]
        let rp = [2.0, 3.5, 3.5, 1.0, 5.0];
        let rg = [2.0, 3.0, 1.0, 4.0, 5.0];
        let mp = 3.0;
        let mg = 3.0;
        let cov: f64 = rp.iter().zip(&rg).map(|(a, b)| (a - mp) * (b - mg)).sum();
        let vp: f64 = rp.iter().map(|a| (a - mp) * (a - mp)).sum();
        let vg: f64 = rg.iter().map(|b| (b - mg) * (b - mg)).sum();
        // cov = 1 + 0 - 1 - 2 + 4 = 2 ; vp = 9.5 ; vg = 10
        assert_eq!((cov, vp, vg), (2.0, 9.5, 10.0));
        let expected = 2.0 / libm::sqrt(95.0);
        assert!((spearman(&pred, &gold) - expected).abs() < 1e-12);
    }

    #[test]
    fn v_measure_edges() {
        assert_eq!(v_measure(&[0, 0, 1, 1], &[5, 5, 7, 7]).v_measure, 1.0);
        let single = v_measure(&[0, 0, 1, 1], &[0, 0, 0, 0]);
        assert_eq!(single.homogeneity, 0.0);
        assert_eq!(single.completeness, 1.0);
        assert_eq!(single.v_measure, 0.0);
    }

    #[test]
    fn f1_macro_basics() {
        assert_eq!(f1_macro(&[0, 1, 0, 1], &[0, 1, 0, 1]), 1.0);
        // class 0: tp1 fp1 fn1 -> .5 ; class 1: tp1 fp1 fn1 -> .5
        assert!((f1_macro(&[0, 0, 1, 1], &[0, 1, 0, 1]) - 0.5).abs() < 1e-12);
    }
}
