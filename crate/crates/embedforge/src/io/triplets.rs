//! Triplet JSONL. Each line carries the category's generator keys, for
//! example `{"user-query", "positive-document", "hard-negative-document"}`,
//! plus optional `id`, `category`, `source` and `meta`. STS lines also
//! carry `high-score` and `low-score`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use embedforge_core::{Category, Source, StsTargets, Triplet};
use serde_json::{json, Map, Value};

use super::{create, finish, lines, nfc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripletSet {
    pub triplets: Vec<Triplet>,
    pub rejections: Vec<Rejection>,
}

fn text(obj: &Map<String, Value>, key: &str) -> Result<String, String> {
    match obj.get(key) {
        None => Err(format!("missing key {key:?}")),
        Some(Value::String(s)) => Ok(nfc(s)),
        Some(_) => Err(format!("key {key:?} is not a string")),
    }
}

fn score(obj: &Map<String, Value>, key: &str) -> Result<f64, String> {
    match obj.get(key) {
        None => Err(format!("missing key {key:?}")),
        Some(v) => v.as_f64().ok_or_else(|| format!("key {key:?} is not a number")),
    }
}

/// Converts one JSON object into a validated triplet. `category` overrides
/// the line's own `category` key; `default_id` is used when `id` is absent.
pub fn parse_triplet(value: &Value, category: Option<Category>, default_id: &str) -> Result<Triplet, String> {
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    let category = match category {
        Some(c) => c,
        None => {
            let c = obj.get("category").and_then(Value::as_str).ok_or("missing key \"category\"")?;
            c.parse().map_err(|_| format!("unknown category {c:?}"))?
        }
    };
    let [kq, kp, kn] = category.response_keys();
    let query = text(obj, kq)?;
    let positive = text(obj, kp)?;
    let negative = match obj.get(kn) {
        None if category == Category::Sts => None,
        _ => Some(text(obj, kn)?),
    };
    let sts = if category == Category::Sts {
        Some(StsTargets { high: score(obj, "high-score")?, low: score(obj, "low-score")? })
    } else {
        None
    };
    let id = match obj.get("id") {
        None => default_id.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("key \"id\" is not a string".into()),
    };
    let source = match obj.get("source").and_then(Value::as_str) {
        None => Source::Synthetic,
        Some(s) => s.parse().map_err(|_| format!("unknown source {s:?}"))?,
    };
    let mut meta = BTreeMap::new();
    if let Some(m) = obj.get("meta") {
        let m = m.as_object().ok_or("key \"meta\" is not an object")?;
        for (k, v) in m {
            let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
            meta.insert(k.clone(), v);
        }
    }
    let t = Triplet { id, category, query, positive, negative, sts, source, meta };
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

/// Loads every valid line; invalid lines are skipped and reported.
pub fn load_triplets(path: &Path, category: Option<Category>) -> Result<TripletSet> {
    let mut set = TripletSet::default();
    for (line, raw) in lines(path)? {
        let parsed = serde_json::from_str::<Value>(&raw)
            .map_err(|e| format!("invalid JSON: {e}"))
            .and_then(|v| {
                let fallback = category.or_else(|| v.get("category").and_then(Value::as_str).and_then(|c| c.parse().ok()));
                let default_id = format!("{}-{line}", fallback.map_or("triplet", Category::as_str));
                parse_triplet(&v, category, &default_id)
            });
        match parsed {
            Ok(t) => set.triplets.push(t),
            Err(reason) => {
                log::warn!("{}:{line}: skipped: {reason}", path.display());
                set.rejections.push(Rejection { line, reason });
            }
        }
    }
    Ok(set)
}

pub fn triplet_to_json(t: &Triplet) -> Value {
    let [kq, kp, kn] = t.category.response_keys();
    let mut obj = Map::new();
    obj.insert("id".into(), json!(t.id));
    obj.insert("category".into(), json!(t.category.as_str()));
    obj.insert(kq.into(), json!(t.query));
    obj.insert(kp.into(), json!(t.positive));
    if let Some(n) = &t.negative {
        obj.insert(kn.into(), json!(n));
    }
    if let Some(s) = t.sts {
        obj.insert("high-score".into(), json!(s.high));
        obj.insert("low-score".into(), json!(s.low));
    }
    obj.insert("source".into(), json!(t.source.as_str()));
    if !t.meta.is_empty() {
        obj.insert("meta".into(), json!(t.meta));
    }
    Value::Object(obj)
}

pub fn write_triplets<'a>(path: &Path, triplets: impl IntoIterator<Item = &'a Triplet>) -> Result<()> {
    let mut w = create(path)?;
    for t in triplets {
        writeln!(w, "{}", triplet_to_json(t)).map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}
