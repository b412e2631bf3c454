//! Embedding stores on disk.
//!
//! Packed: `EMB1`, u32 dim, u64 count, then per entry u32 id length, the
//! id bytes and `dim` f32 values, all little-endian. Canonical: JSONL of
//! `{"id": str, "vector": [f32...]}`. Readers sniff the magic bytes.

use std::io::{Read, Write};
use std::path::Path;

use embedforge_core::EmbeddingStore;
use serde::{Deserialize, Serialize};

use super::{create, finish, lines, open, ByteCursor};
use crate::error::{Error, Result};

pub const PACKED_MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: u64 = 16;

/// Expected byte length of a packed file.
pub fn packed_len(store: &EmbeddingStore) -> u64 {
    HEADER_LEN + store.iter().map(|(id, _)| 4 + id.len() as u64 + 4 * store.dim() as u64).sum::<u64>()
}

pub fn write_packed(path: &Path, store: &EmbeddingStore) -> Result<()> {
    let mut w = create(path)?;
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(PACKED_MAGIC)?;
    put(&(store.dim() as u32).to_le_bytes())?;
    put(&(store.len() as u64).to_le_bytes())?;
    for (id, v) in store.iter() {
        put(&(id.len() as u32).to_le_bytes())?;
        put(id.as_bytes())?;
        for x in v {
            put(&x.to_le_bytes())?;
        }
    }
    finish(path, w)
}

pub fn read_packed(path: &Path) -> Result<EmbeddingStore> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let corrupt = |reason: String| Error::CorruptHeader { path: path.to_path_buf(), reason };
    if bytes.len() < HEADER_LEN as usize || &bytes[..4] != PACKED_MAGIC {
        return Err(corrupt("missing EMB1 magic".into()));
    }
    let mut c = ByteCursor::new(path, &bytes, 4);
    let dim = c.u32("dimension")? as usize;
    let count = c.u64("count")?;
    let mut store = EmbeddingStore::new(dim).map_err(|_| corrupt("declared dimension is zero".into()))?;
    for i in 0..count {
        let len = c.u32("id length")? as usize;
        let id = std::str::from_utf8(c.take(len, "id")?).map_err(|_| corrupt(format!("entry {i}: id is not UTF-8")))?;
        let v = c.f32s(dim, "vector")?;
        store.insert(id, v)?;
    }
    if c.remaining() != 0 {
        return Err(corrupt(format!("{} trailing bytes after {count} entries", c.remaining())));
    }
    if store.len() as u64 != count {
        return Err(corrupt("duplicate ids".into()));
    }
    Ok(store)
}

#[derive(Serialize, Deserialize)]
struct JsonEntry<'a> {
    #[serde(borrow)]
    id: std::borrow::Cow<'a, str>,
    vector: Vec<f32>,
}

pub fn write_jsonl_embeddings(path: &Path, store: &EmbeddingStore) -> Result<()> {
    let mut w = create(path)?;
    for (id, v) in store.iter() {
        let line = serde_json::to_string(&JsonEntry { id: id.into(), vector: v.to_vec() }).expect("finite floats serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

/// The first vector fixes the dimension; later mismatches are errors.
pub fn read_jsonl_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let mut store: Option<EmbeddingStore> = None;
    for (line, raw) in lines(path)? {
        let e: JsonEntry = serde_json::from_str(&raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let s = match &mut store {
            Some(s) => s,
            None => store.insert(EmbeddingStore::new(e.vector.len()).map_err(|_| Error::parse(path, line, "empty vector"))?),
        };
        s.insert(e.id.into_owned(), e.vector)?;
    }
    store.ok_or_else(|| Error::parse(path, 0, "no embeddings"))
}

/// Reads either format, choosing by the magic bytes.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let mut head = [0u8; 4];
    let n = open(path)?.read(&mut head).map_err(|e| Error::io(path, e))?;
    if n == 4 && &head == PACKED_MAGIC {
        read_packed(path)
    } else {
        read_jsonl_embeddings(path)
    }
}
