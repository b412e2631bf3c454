//! Reranker scoring for the triplet filter, with a content-addressed cache.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use embedforge_core::filter::{filter_triplets, FilterConfig, RerankScore};
use embedforge_core::{Category, Triplet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::generation::API_KEY_ENV;
use crate::io::{lines, sha256_hex};

/// Scores documents against one query; scores must lie in [0, 1].
pub trait Reranker: Send + Sync {
    fn score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>>;
}

/// `POST {query, documents}` returning `{scores}`.
pub struct HttpReranker {
    url: String,
    timeout: Duration,
    api_key: Option<String>,
}

impl HttpReranker {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        HttpReranker { url: url.into(), timeout, api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()) }
    }
}

#[derive(Deserialize)]
struct RerankResponse {
    scores: Vec<f64>,
}

impl Reranker for HttpReranker {
    fn score(&self, query: &str, docs: &[&str]) -> Result<Vec<f64>> {
        let mut call = crate::generation::agent(self.timeout).post(&self.url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call
            .send_json(json!({"query": query, "documents": docs}))
            .map_err(|e| Error::Transport(crate::generation::classify(e).to_string()))?;
        let parsed: RerankResponse =
            resp.body_mut().read_json().map_err(|e| Error::Transport(format!("malformed reranker response: {e}")))?;
        Ok(parsed.scores)
    }
}

/// SHA-256 over the query length (u64 LE), the query and the document. The
/// length prefix keeps distinct pairs from colliding on concatenation.
pub fn pair_key(query: &str, doc: &str) -> String {
    let mut bytes = Vec::with_capacity(query.len() + doc.len() + 8);
    bytes.extend_from_slice(&(query.len() as u64).to_le_bytes());
    bytes.extend_from_slice(query.as_bytes());
    bytes.extend_from_slice(doc.as_bytes());
    sha256_hex(&bytes)
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    score: f64,
}

/// Scores keyed by [`pair_key`], optionally persisted as JSONL.
#[derive(Default)]
pub struct ScoreCache {
    path: Option<PathBuf>,
    scores: HashMap<String, f64>,
}

impl ScoreCache {
    pub fn in_memory() -> Self {
        ScoreCache::default()
    }

    /// Loads an existing cache file, or starts an empty one at `path`.
    pub fn open(path: &Path) -> Result<Self> {
        let mut scores = HashMap::new();
        if path.exists() {
            for (line, raw) in lines(path)? {
                match serde_json::from_str::<CacheLine>(&raw) {
                    Ok(c) => {
                        scores.insert(c.key, c.score);
                    }
                    Err(e) => log::warn!("{}:{line}: ignoring cache line: {e}", path.display()),
                }
            }
        }
        Ok(ScoreCache { path: Some(path.to_path_buf()), scores })
    }

    pub fn get(&self, query: &str, doc: &str) -> Option<f64> {
        self.scores.get(&pair_key(query, doc)).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn extend(&mut self, new: Vec<(String, f64)>) -> Result<()> {
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
            let mut buf = String::new();
            for (key, score) in &new {
                buf.push_str(&serde_json::to_string(&CacheLine { key: key.clone(), score: *score }).expect("finite"));
                buf.push('\n');
            }
            f.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))?;
        }
        self.scores.extend(new);
        Ok(())
    }
}

/// Scores the positive and negative of every non-STS triplet. Each distinct
/// (query, doc) pair missing from the cache is sent once; pairs are grouped
/// into one request per query and up to `jobs` requests run concurrently.
pub fn score_triplets(
    triplets: &[Triplet],
    reranker: &dyn Reranker,
    cache: &mut ScoreCache,
    jobs: usize,
) -> Result<Vec<RerankScore>> {
    let scored: Vec<&Triplet> = triplets.iter().filter(|t| t.category != Category::Sts).collect();
    let mut missing: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for t in &scored {
        let neg = t.negative.as_deref().ok_or_else(|| Error::Schema(format!("{} has no negative", t.id)))?;
        for doc in [t.positive.as_str(), neg] {
            if cache.get(&t.query, doc).is_none() {
                missing.entry(&t.query).or_default().insert(doc);
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let groups: Vec<(&str, Vec<&str>)> = missing.into_iter().map(|(q, d)| (q, d.into_iter().collect())).collect();
    let fresh: Vec<Vec<(String, f64)>> = pool.install(|| {
        groups
            .par_iter()
            .map(|(query, docs)| {
                let scores = reranker.score(query, docs)?;
                if scores.len() != docs.len() {
                    return Err(Error::Transport(format!(
                        "reranker returned {} scores for {} documents",
                        scores.len(),
                        docs.len()
                    )));
                }
                docs.iter()
                    .zip(scores)
                    .map(|(doc, s)| {
                        if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
                            return Err(embedforge_core::Error::ScoreOutOfRange { id: (*doc).chars().take(40).collect(), value: s }.into());
                        }
                        Ok((pair_key(query, doc), s))
                    })
                    .collect()
            })
            .collect::<Result<_>>()
    })?;
    cache.extend(fresh.into_iter().flatten().collect())?;

    Ok(scored
        .iter()
        .map(|t| RerankScore {
            id: t.id.clone(),
            s_pos: cache.get(&t.query, &t.positive).expect("scored above"),
            s_neg: cache.get(&t.query, t.negative.as_deref().expect("checked above")).expect("scored above"),
        })
        .collect())
}

/// Triplets kept by the margin filter, plus the rejected ids. STS triplets
/// have no negative and pass through unfiltered; triplets without a score
/// are rejected as unscored.
pub struct FilteredSet {
    pub kept: Vec<Triplet>,
    pub rejected: Vec<(String, String)>,
}

pub fn apply_filter(triplets: Vec<Triplet>, scores: &[RerankScore], cfg: &FilterConfig) -> Result<FilteredSet> {
    for s in scores {
        s.validate()?;
    }
    let outcome = filter_triplets(scores, cfg);
    let kept_ids: BTreeSet<&str> = outcome.kept.iter().map(String::as_str).collect();
    let mut reasons: BTreeMap<&str, String> =
        outcome.rejected.iter().map(|(id, r)| (id.as_str(), r.to_string())).collect();
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for t in triplets {
        if t.category == Category::Sts || kept_ids.contains(t.id.as_str()) {
            kept.push(t);
        } else {
            let reason = reasons.remove(t.id.as_str()).unwrap_or_else(|| "unscored".to_string());
            rejected.push((t.id, reason));
        }
    }
    Ok(FilteredSet { kept, rejected })
}
