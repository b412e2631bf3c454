//! Task manifests, dataset loading and report rendering for the benchmark
//! evaluators.
//!
//! A manifest lists datasets as `[[dataset]]` tables with `id`, `task` and
//! `path` (relative to the manifest). Embeddings for dataset `id` live under
//! `<emb>/<id>/`: `queries.*` and `corpus.*` for retrieval and reranking,
//! `texts.*` for every other task, in either embedding file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use embedforge_core::eval::{
    aggregate, eval_classification, eval_clustering, eval_multilabel, eval_pair_classification, eval_reranking,
    eval_retrieval, eval_sts, ClassificationProtocol, ClusteringProtocol, DatasetScore, EvalReport, MultilabelProtocol,
    RerankCandidates, TaskKind,
};
use embedforge_core::EmbeddingStore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{lines, load_labeled_examples, load_retrieval_collection, load_queries, read_embeddings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub task: TaskKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskManifest {
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub classification: ClassificationProtocol,
    #[serde(default)]
    pub multilabel: MultilabelProtocol,
    #[serde(default)]
    pub clustering: ClusteringProtocol,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
}

/// Reads a manifest and resolves dataset paths against its directory.
pub fn load_manifest(path: &Path) -> Result<TaskManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m: TaskManifest = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = std::collections::BTreeSet::new();
    for d in &mut m.datasets {
        if !seen.insert(d.id.clone()) {
            return Err(Error::Config(format!("{}: duplicate dataset id {:?}", path.display(), d.id)));
        }
        if d.path.is_relative() {
            d.path = base.join(&d.path);
        }
    }
    if m.datasets.is_empty() {
        return Err(Error::Config(format!("{}: no datasets", path.display())));
    }
    Ok(m)
}

/// Loads `<dir>/<stem>.emb` or `<dir>/<stem>.jsonl`.
pub fn find_store(dir: &Path, stem: &str) -> Result<EmbeddingStore> {
    for ext in ["emb", "jsonl"] {
        let p = dir.join(format!("{stem}.{ext}"));
        if p.is_file() {
            return read_embeddings(&p);
        }
    }
    Err(Error::FileMissing { path: dir.join(format!("{stem}.{{emb,jsonl}}")) })
}

fn tsv_pairs<T>(path: &Path, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<(String, String, T)>> {
    lines(path)?
        .into_iter()
        .map(|(line, raw)| {
            let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
            match cols[..] {
                [a, b, v] => parse(v)
                    .map(|v| (a.to_string(), b.to_string(), v))
                    .ok_or_else(|| Error::parse(path, line, format!("bad value {v:?}"))),
                _ => Err(Error::parse(path, line, "expected 3 tab-separated columns")),
            }
        })
        .collect()
}

#[derive(Deserialize)]
struct CandidateLine {
    qid: String,
    positives: Vec<String>,
    negatives: Vec<String>,
}

/// Main score plus task-specific detail for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetResult {
    pub score: DatasetScore,
    pub details: Value,
}

pub fn evaluate_dataset(entry: &DatasetEntry, emb_root: &Path, m: &TaskManifest) -> Result<DatasetResult> {
    let data = &entry.path;
    let emb = emb_root.join(&entry.id);
    let (main, details) = match entry.task {
        TaskKind::Retrieval => {
            let coll = load_retrieval_collection(data)?;
            let s = eval_retrieval(&find_store(&emb, "queries")?, &find_store(&emb, "corpus")?, &coll)?;
            (s.main(), json!(s))
        }
        TaskKind::Reranking => {
            // Query texts are not needed for scoring but pin the id set.
            let queries = load_queries(&data.join("queries.jsonl"))?;
            let path = data.join("candidates.jsonl");
            let mut cands = BTreeMap::new();
            for (line, raw) in lines(&path)? {
                let c: CandidateLine = serde_json::from_str(&raw).map_err(|e| Error::parse(&path, line, e.to_string()))?;
                if !queries.contains_key(&c.qid) {
                    return Err(embedforge_core::Error::DanglingReference(c.qid).into());
                }
                cands.insert(c.qid, RerankCandidates { positives: c.positives, negatives: c.negatives });
            }
            let s = eval_reranking(&find_store(&emb, "queries")?, &find_store(&emb, "corpus")?, &cands)?;
            (s, json!({"map": s, "queries": cands.len()}))
        }
        TaskKind::Classification | TaskKind::Multilabel => {
            let train = load_labeled_examples(&data.join("train.jsonl"))?;
            let test = load_labeled_examples(&data.join("test.jsonl"))?;
            let store = find_store(&emb, "texts")?;
            let s = if entry.task == TaskKind::Classification {
                eval_classification(&store, &train, &test, &m.classification)?
            } else {
                eval_multilabel(&store, &train, &test, &m.multilabel)?
            };
            (s.main, json!(s))
        }
        TaskKind::Clustering => {
            let items: Vec<(String, String)> = load_labeled_examples(&data.join("items.jsonl"))?
                .into_iter()
                .map(|e| (e.id, e.labels.into_iter().next().expect("validated non-empty")))
                .collect();
            let s = eval_clustering(&find_store(&emb, "texts")?, &items, &m.clustering)?;
            (s, json!({"v_measure": s, "items": items.len()}))
        }
        TaskKind::PairClassification => {
            let pairs = tsv_pairs(&data.join("pairs.tsv"), |v| match v {
                "1" | "true" => Some(true),
                "0" | "false" => Some(false),
                _ => None,
            })?;
            let s = eval_pair_classification(&find_store(&emb, "texts")?, &pairs)?;
            (s.main(), json!(s))
        }
        TaskKind::Sts => {
            let pairs = tsv_pairs(&data.join("pairs.tsv"), |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))?;
            let s = eval_sts(&find_store(&emb, "texts")?, &pairs)?;
            (s, json!({"spearman": s, "pairs": pairs.len()}))
        }
    };
    Ok(DatasetResult { score: DatasetScore { dataset: entry.id.clone(), task: entry.task, main_score: main }, details })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    #[serde(flatten)]
    pub report: EvalReport,
    #[serde(default)]
    pub details: BTreeMap<String, Value>,
}

/// Evaluates every dataset of the manifest, up to `jobs` at a time.
pub fn evaluate(m: &TaskManifest, emb_root: &Path, model: &str, jobs: usize) -> Result<ModelReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<DatasetResult> =
        pool.install(|| m.datasets.par_iter().map(|d| evaluate_dataset(d, emb_root, m)).collect::<Result<_>>())?;
    let mut details = BTreeMap::new();
    let mut scores = Vec::with_capacity(results.len());
    for r in results {
        details.insert(r.score.dataset.clone(), r.details);
        scores.push(r.score);
    }
    Ok(ModelReport { model: model.to_string(), report: aggregate(scores)?, details })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

/// Markdown table with one row per model, task columns in report order,
/// one decimal, and `-` for tasks a model was not evaluated on.
pub fn render_markdown(reports: &[ModelReport]) -> String {
    let mut out = String::from("| Model |");
    for t in TaskKind::ALL {
        write!(out, " {} |", t.abbreviation()).unwrap();
    }
    out.push_str(" AvgD | AvgT |\n|---|");
    out.push_str(&"---:|".repeat(TaskKind::ALL.len() + 2));
    out.push('\n');
    for r in reports {
        write!(out, "| {} |", r.model).unwrap();
        for t in TaskKind::ALL {
            write!(out, " {} |", cell(r.report.task_means.get(&t).copied())).unwrap();
        }
        writeln!(out, " {} | {} |", cell(Some(r.report.avg_d)), cell(Some(r.report.avg_t))).unwrap();
    }
    out
}
