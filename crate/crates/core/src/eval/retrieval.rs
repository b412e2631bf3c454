//! Retrieval (nDCG@10) and reranking (MAP) by cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_dims, dot64, metrics, unit_vector};
use crate::error::{Error, Result};
use crate::num;
use crate::types::{EmbeddingStore, RetrievalCollection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalScores {
    pub ndcg_at_1: f64,
    pub ndcg_at_10: f64,
    pub ndcg_at_100: f64,
    pub recall_at_10: f64,
    pub recall_at_100: f64,
    pub evaluated_queries: usize,
}

impl RetrievalScores {
    pub fn main(&self) -> f64 {
        self.ndcg_at_10
    }
}

/// Sort `(id, score)` by descending score with ties by ascending id.
pub(crate) fn sort_by_score_desc<T: AsRef<str>>(items: &mut [(T, f64)]) {
    items.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.as_ref().cmp(b.0.as_ref()),
        o => o,
    });
}

/// Ranks the whole corpus for every judged query. Queries with no
/// judgments are excluded from the means.
pub fn eval_retrieval(
    query_emb: &EmbeddingStore,
    doc_emb: &EmbeddingStore,
    coll: &RetrievalCollection,
) -> Result<RetrievalScores> {
    check_dims(query_emb, doc_emb)?;
    let docs: Vec<(&str, Vec<f64>)> = coll
        .corpus
        .keys()
        .map(|id| Ok((id.as_str(), unit_vector(doc_emb, id)?)))
        .collect::<Result<_>>()?;

    let mut sums = [0.0f64; 5];
    let mut evaluated = 0usize;
    for (qid, judged) in &coll.qrels {
        if judged.is_empty() {
            continue;
        }
        let q = unit_vector(query_emb, qid)?;
        let mut ranked: Vec<(&str, f64)> = docs.iter().map(|(id, d)| (*id, dot64(&q, d))).collect();
        sort_by_score_desc(&mut ranked);
        let grades: Vec<u32> =
            ranked.iter().take(100).map(|(id, _)| judged.get(*id).copied().unwrap_or(0)).collect();
        let all: Vec<u32> = judged.values().copied().collect();
        let n_rel = all.iter().filter(|g| **g > 0).count();
        sums[0] += metrics::ndcg_at_k(&grades, &all, 1);
        sums[1] += metrics::ndcg_at_k(&grades, &all, 10);
        sums[2] += metrics::ndcg_at_k(&grades, &all, 100);
        sums[3] += metrics::recall_at_k(&grades, n_rel, 10);
        sums[4] += metrics::recall_at_k(&grades, n_rel, 100);
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::EmptyInput("no judged queries"));
    }
    let m = |s: f64| 100.0 * s / evaluated as f64;
    Ok(RetrievalScores {
        ndcg_at_1: m(sums[0]),
        ndcg_at_10: m(sums[1]),
        ndcg_at_100: m(sums[2]),
        recall_at_10: m(sums[3]),
        recall_at_100: m(sums[4]),
        evaluated_queries: evaluated,
    })
}

/// Positive and negative candidate ids of one reranking query.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RerankCandidates {
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

/// MAP over queries, ×100.
pub fn eval_reranking(
    query_emb: &EmbeddingStore,
    cand_emb: &EmbeddingStore,
    candidates: &BTreeMap<String, RerankCandidates>,
) -> Result<f64> {
    check_dims(query_emb, cand_emb)?;
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no reranking queries"));
    }
    let mut total = 0.0;
    for (qid, c) in candidates {
        if c.positives.is_empty() || c.negatives.is_empty() {
            return Err(Error::invalid(
                "reranking candidates",
                alloc::format!("query {qid} needs at least one positive and one negative"),
            ));
        }
        let q = query_emb.require(qid)?;
        let mut scored: Vec<((&str, bool), f64)> = Vec::new();
        for (ids, positive) in [(&c.positives, true), (&c.negatives, false)] {
            for id in ids {
                scored.push(((id.as_str(), positive), num::cosine(q, cand_emb.require(id)?)));
            }
        }
        scored.sort_by(|a, b| match b.1.total_cmp(&a.1) {
            Ordering::Equal => a.0 .0.cmp(b.0 .0),
            o => o,
        });
        let labels: Vec<bool> = scored.iter().map(|((_, p), _)| *p).collect();
        total += metrics::average_precision_ranked(&labels);
    }
    Ok(100.0 * total / candidates.len() as f64)
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

    fn collection(qrels: &[(&str, &str, u32)], docs: &[&str], queries: &[&str]) -> RetrievalCollection {
        let mut c = RetrievalCollection::default();
        for d in docs {
            c.corpus.insert(d.to_string(), String::new());
        }
        for q in queries {
            c.queries.insert(q.to_string(), String::new());
        }
        for (q, d, g) in qrels {
            c.qrels.entry(q.to_string()).or_default().insert(d.to_string(), *g);
        }
        c
    }

    #[test]
    fn perfect_ranking() {
        let q = store(&[("q1", [1.0, 0.0])]);
        let d = store(&[("d1", [1.0, 0.0]), ("d2", [0.0, 1.0])]);
        let c = collection(&[("q1", "d1", 1)], &["d1", "d2"], &["q1"]);
        let s = eval_retrieval(&q, &d, &c).unwrap();
        assert_eq!(s.ndcg_at_10, 100.0);
        assert_eq!(s.recall_at_10, 100.0);
    }

    #[test]
    fn graded_order() {
        let q = store(&[("q1", [1.0, 0.0])]);
        let d = store(&[("d1", [0.6, 0.8]), ("d2", [1.0, 0.1])]);
        let c = collection(&[("q1", "d1", 2), ("q1", "d2", 1)], &["d1", "d2"], &["q1"]);
        let s = eval_retrieval(&q, &d, &c).unwrap();
        assert!((s.ndcg_at_10 - 85.97).abs() < 0.005, "{}", s.ndcg_at_10);
    }

    #[test]
    fn unjudged_queries_excluded() {
        let q = store(&[("q1", [1.0, 0.0]), ("q2", [0.0, 1.0])]);
        let d = store(&[("d1", [1.0, 0.0]), ("d2", [0.0, 1.0])]);
        let c = collection(&[("q1", "d1", 1)], &["d1", "d2"], &["q1", "q2"]);
        let s = eval_retrieval(&q, &d, &c).unwrap();
        assert_eq!(s.evaluated_queries, 1);
        assert_eq!(s.ndcg_at_10, 100.0);
    }

    #[test]
    fn missing_embedding_and_dims() {
        let q = store(&[("q1", [1.0, 0.0])]);
        let d = store(&[("d1", [1.0, 0.0])]);
        let c = collection(&[("q1", "d1", 1)], &["d1", "d2"], &["q1"]);
        assert_eq!(eval_retrieval(&q, &d, &c), Err(Error::MissingEmbedding("d2".into())));
        let d3 = EmbeddingStore::new(3).unwrap();
        assert!(matches!(eval_retrieval(&q, &d3, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reranking_examples() {
        let q = store(&[("q", [1.0, 0.0])]);
        let cands = store(&[("a", [1.0, 0.0]), ("b", [0.9, 0.4]), ("c", [0.5, 0.9])]);
        let mut m = BTreeMap::new();
        m.insert(
            "q".to_string(),
            RerankCandidates { positives: vec!["a".into(), "c".into()], negatives: vec!["b".into()] },
        );
        let map = eval_reranking(&q, &cands, &m).unwrap();
        assert!((map - 100.0 * (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-9);
        m.get_mut("q").unwrap().positives = vec!["c".into()];
        m.get_mut("q").unwrap().negatives = vec!["a".into(), "b".into()];
        assert!((eval_reranking(&q, &cands, &m).unwrap() - 100.0 / 3.0).abs() < 1e-9);
    }
}
