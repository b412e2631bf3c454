//! BEIR-style `corpus.jsonl`, `queries.jsonl` and `qrels.tsv`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use embedforge_core::RetrievalCollection;
use serde::Deserialize;
use serde_json::json;

use super::{create, finish, lines, nfc};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Record {
    #[serde(rename = "_id")]
    id: String,
    #[serde(default)]
    title: Option<String>,
    text: String,
}

fn load_records(path: &Path, with_title: bool) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, raw) in lines(path)? {
        let r: Record = serde_json::from_str(&raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let text = match r.title.filter(|t| with_title && !t.is_empty()) {
            Some(title) => format!("{title} {}", r.text),
            None => r.text,
        };
        if out.insert(r.id.clone(), nfc(&text)).is_some() {
            return Err(Error::parse(path, line, format!("duplicate id {:?}", r.id)));
        }
    }
    Ok(out)
}

/// Corpus documents; a non-empty title is prepended to the text.
pub fn load_corpus(path: &Path) -> Result<BTreeMap<String, String>> {
    load_records(path, true)
}

pub fn load_queries(path: &Path) -> Result<BTreeMap<String, String>> {
    load_records(path, false)
}

/// Tab-separated `query-id, doc-id, grade` without header.
pub fn load_qrels(path: &Path) -> Result<BTreeMap<String, BTreeMap<String, u32>>> {
    let mut out: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for (line, raw) in lines(path)? {
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [q, d, g] = cols[..] else {
            return Err(Error::parse(path, line, format!("expected 3 tab-separated columns, found {}", cols.len())));
        };
        let grade: u32 = g.parse().map_err(|_| Error::parse(path, line, format!("grade {g:?} is not a non-negative integer")))?;
        out.entry(q.to_string()).or_default().insert(d.to_string(), grade);
    }
    Ok(out)
}

pub fn load_retrieval_collection(dir: &Path) -> Result<RetrievalCollection> {
    let coll = RetrievalCollection {
        corpus: load_corpus(&dir.join("corpus.jsonl"))?,
        queries: load_queries(&dir.join("queries.jsonl"))?,
        qrels: load_qrels(&dir.join("qrels.tsv"))?,
    };
    coll.validate()?;
    Ok(coll)
}

pub fn write_retrieval_collection(dir: &Path, coll: &RetrievalCollection) -> Result<()> {
    for (name, map) in [("corpus.jsonl", &coll.corpus), ("queries.jsonl", &coll.queries)] {
        let path = dir.join(name);
        let mut w = create(&path)?;
        for (id, text) in map {
            writeln!(w, "{}", json!({"_id": id, "text": text})).map_err(|e| Error::io(&path, e))?;
        }
        finish(&path, w)?;
    }
    let path = dir.join("qrels.tsv");
    let mut w = create(&path)?;
    for (q, docs) in &coll.qrels {
        for (d, g) in docs {
            writeln!(w, "{q}\t{d}\t{g}").map_err(|e| Error::io(&path, e))?;
        }
    }
    finish(&path, w)
}
