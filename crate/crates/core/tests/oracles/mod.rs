//! Deliberately naive reference implementations used to cross-check the
//! library. Shared with the workspace acceptance suite via `#[path]`.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

/// Hard-negative eligibility by direct sorting and filtering.
pub fn mining(
    scores: &[(String, f64)],
    positive: &str,
    also_relevant: &BTreeSet<String>,
    top_n: usize,
    window: usize,
) -> Option<(f64, Vec<String>)> {
    let mut ranked: Vec<(String, f64)> = scores.to_vec();
    // Insertion sort: descending score, ascending id.
    for i in 1..ranked.len() {
        let mut j = i;
        while j > 0 && {
            let (a, b) = (&ranked[j - 1], &ranked[j]);
            a.1 < b.1 || (a.1 == b.1 && a.0 > b.0)
        } {
            ranked.swap(j - 1, j);
            j -= 1;
        }
    }
    let pos_rank = ranked.iter().position(|(d, _)| d == positive)?;
    let pos_score = ranked[pos_rank].1;
    let top: Vec<f64> = ranked.iter().take(top_n).map(|r| r.1).collect();
    let n = top.len() as f64;
    let mean = top.iter().sum::<f64>() / n;
    let sigma = (top.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut eligible = Vec::new();
    for (rank, (doc, score)) in ranked.iter().enumerate() {
        if rank >= window {
            break;
        }
        if rank > pos_rank && *score <= pos_score - sigma && !also_relevant.contains(doc) {
            eligible.push(doc.clone());
        }
    }
    Some((sigma, eligible))
}

/// DCG with linear gain over the first `k` grades.
pub fn dcg(grades: &[u32], k: usize) -> f64 {
    let mut total = 0.0;
    for (i, g) in grades.iter().enumerate().take(k) {
        total += *g as f64 / ((i + 2) as f64).log2();
    }
    total
}

/// nDCG@k where the ideal DCG is the maximum over all orderings of the
/// judged grades (exhaustive for ≤ 8 judged docs, greedy selection above).
pub fn ndcg(ranked: &[u32], judged: &[u32], k: usize) -> f64 {
    let ideal = if judged.len() <= 8 {
        let mut best = 0.0f64;
        permutations(judged.len(), &mut |perm| {
            let order: Vec<u32> = perm.iter().map(|&i| judged[i]).collect();
            best = best.max(dcg(&order, k));
        });
        best
    } else {
        let mut left = judged.to_vec();
        let mut order = Vec::new();
        while !left.is_empty() {
            let (i, _) = left.iter().enumerate().max_by_key(|(_, g)| **g).unwrap();
            order.push(left.remove(i));
        }
        dcg(&order, k)
    };
    if ideal == 0.0 {
        0.0
    } else {
        dcg(ranked, k) / ideal
    }
}

fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == used.len() {
            f(cur);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut Vec::new(), &mut vec![false; n], f);
}

/// Mean of precision@k over the ranks holding a positive.
pub fn ap_ranked(labels: &[bool]) -> f64 {
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    if positives.is_empty() {
        return 0.0;
    }
    positives
        .iter()
        .map(|&k| labels[..=k].iter().filter(|l| **l).count() as f64 / (k + 1) as f64)
        .sum::<f64>()
        / positives.len() as f64
}

/// Step-wise AP over distinct thresholds, recounting from scratch each time.
pub fn ap_scores(scores: &[f64], labels: &[bool]) -> f64 {
    let total = labels.iter().filter(|l| **l).count();
    if total == 0 {
        return 0.0;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let selected: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= t).collect();
        let tp = selected.iter().filter(|&&i| labels[i]).count();
        let recall = tp as f64 / total as f64;
        ap += (recall - prev_recall) * tp as f64 / selected.len() as f64;
        prev_recall = recall;
    }
    ap
}

/// Average ranks by counting smaller and equal values.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let less = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts.filter(|c| *c > 0).map(|c| c as f64 / n).map(|p| -p * p.ln()).sum()
}

/// V-measure from a contingency table, with conditional entropies
/// computed as joint minus marginal entropy.
pub fn v_measure(gold: &[usize], pred: &[usize]) -> f64 {
    let n = gold.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut g: HashMap<usize, usize> = HashMap::new();
    let mut p: HashMap<usize, usize> = HashMap::new();
    for (a, b) in gold.iter().zip(pred) {
        *joint.entry((*a, *b)).or_default() += 1;
        *g.entry(*a).or_default() += 1;
        *p.entry(*b).or_default() += 1;
    }
    let h_joint = entropy(joint.values().copied(), n);
    let h_c = entropy(g.values().copied(), n);
    let h_k = entropy(p.values().copied(), n);
    let h = if h_c == 0.0 { 1.0 } else { 1.0 - (h_joint - h_k) / h_c };
    let c = if h_k == 0.0 { 1.0 } else { 1.0 - (h_joint - h_c) / h_k };
    if h + c == 0.0 {
        0.0
    } else {
        2.0 * h * c / (h + c)
    }
}

/// Mean InfoNCE loss computed directly from the softmax definition.
pub fn infonce(rows: &[Vec<f64>], labels: &[usize], tau: f64) -> f64 {
    let mut total = 0.0;
    for (row, &l) in rows.iter().zip(labels) {
        let z: f64 = row.iter().map(|s| (s / tau).exp()).sum();
        total -= ((row[l] / tau).exp() / z).ln();
    }
    total / rows.len() as f64
}

/// Max relative error between an analytic gradient and central finite
/// differences of `f`. Entries far below the gradient's overall scale are
/// compared against a floor of `1e-6 · (1 + max |g|)` instead of themselves.
pub fn max_rel_error(x: &[f64], analytic: &[f64], h: f64, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = 1e-6 * (1.0 + scale);
    let mut worst = 0.0f64;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let down = f(&xp);
        xp[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
