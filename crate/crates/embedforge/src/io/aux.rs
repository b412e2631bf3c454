//! Smaller line-oriented formats used by the pipeline stages.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use embedforge_core::filter::RerankScore;
use embedforge_core::topics::LabeledQuery;
use embedforge_core::LabeledExample;
use serde::{Deserialize, Serialize};

use super::{create, finish, lines, nfc};
use crate::error::{Error, Result};

/// Writes one JSON document per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| Error::io(path, e.into()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    lines(path)?
        .into_iter()
        .map(|(line, raw)| serde_json::from_str(&raw).map(|v| (line, v)).map_err(|e| Error::parse(path, line, e.to_string())))
        .collect()
}

#[derive(Deserialize)]
struct RawLabeledQuery {
    query: String,
    labels: Vec<(String, f64)>,
}

/// Classified query log: `{"query": str, "labels": [[topic, score], ...]}`.
pub fn load_labeled_queries(path: &Path) -> Result<Vec<LabeledQuery>> {
    read_jsonl::<RawLabeledQuery>(path)?
        .into_iter()
        .map(|(line, r)| LabeledQuery::new(nfc(&r.query), r.labels).map_err(|e| Error::parse(path, line, e.to_string())))
        .collect()
}

#[derive(Deserialize)]
struct RawExample {
    id: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    labels: Vec<String>,
}

/// `{"id", "text", "label"}` or `{"id", "text", "labels": [...]}`.
pub fn load_labeled_examples(path: &Path) -> Result<Vec<LabeledExample>> {
    read_jsonl::<RawExample>(path)?
        .into_iter()
        .map(|(line, r)| {
            let mut labels = r.labels;
            labels.extend(r.label);
            let ex = LabeledExample { id: r.id, text: nfc(&r.text), labels };
            ex.validate().map_err(|e| Error::parse(path, line, e.to_string()))?;
            Ok(ex)
        })
        .collect()
}

/// Reranker scores keyed by triplet id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub s_pos: f64,
    pub s_neg: f64,
}

impl From<ScoreRecord> for RerankScore {
    fn from(r: ScoreRecord) -> Self {
        RerankScore { id: r.id, s_pos: r.s_pos, s_neg: r.s_neg }
    }
}

pub fn load_score_run(path: &Path) -> Result<Vec<RerankScore>> {
    Ok(read_jsonl::<ScoreRecord>(path)?.into_iter().map(|(_, r)| r.into()).collect())
}

/// TREC run: `qid docid score` or the six-column `qid Q0 docid rank score tag`,
/// separated by tabs or spaces.
pub fn load_teacher_run(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (line, raw) in lines(path)? {
        let cols: Vec<&str> = raw.split_whitespace().collect();
        let (q, d, s) = match cols[..] {
            [q, d, s] => (q, d, s),
            [q, _, d, _, s, _] => (q, d, s),
            _ => return Err(Error::parse(path, line, format!("expected 3 or 6 columns, found {}", cols.len()))),
        };
        let score: f64 = s.parse().map_err(|_| Error::parse(path, line, format!("score {s:?} is not a number")))?;
        if !score.is_finite() {
            return Err(Error::parse(path, line, "score is not finite"));
        }
        if out.entry(q.to_string()).or_default().insert(d.to_string(), score).is_some() {
            return Err(Error::parse(path, line, format!("duplicate pair ({q}, {d})")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedRecord {
    pub qid: String,
    pub pos: String,
    pub negs: Vec<String>,
    pub sigma: f64,
}

pub fn write_mined(path: &Path, records: &[MinedRecord]) -> Result<()> {
    write_jsonl(path, records)
}

/// CSV with header `batch_index,loss`.
pub fn write_loss_curve(path: &Path, losses: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "batch_index,loss").map_err(|e| Error::io(path, e))?;
    for (i, l) in losses.iter().enumerate() {
        writeln!(w, "{i},{l}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

pub fn read_loss_curve(path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, raw) in lines(path)?.into_iter().skip(1) {
        let (_, l) = raw.split_once(',').ok_or_else(|| Error::parse(path, line, "expected batch_index,loss"))?;
        out.push(l.trim().parse().map_err(|_| Error::parse(path, line, "bad loss value"))?);
    }
    Ok(out)
}
