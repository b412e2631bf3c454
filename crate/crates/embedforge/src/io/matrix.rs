//! Embedding matrices (`VMAT`), token statistics and id maps.
//!
//! Matrix layout, little-endian: `VMAT`, u32 V, u32 d, u32 token count,
//! then each token as u32 length plus UTF-8 bytes, then V·d f32 values.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use embedforge_core::vocab::{EmbeddingMatrix, TokenStats};

use super::{create, finish, lines, open, ByteCursor};
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 4] = b"VMAT";

pub fn write_matrix(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    let mut w = create(path)?;
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(MATRIX_MAGIC)?;
    put(&(m.vocab_size() as u32).to_le_bytes())?;
    put(&(m.dim() as u32).to_le_bytes())?;
    put(&(m.tokens().len() as u32).to_le_bytes())?;
    for t in m.tokens() {
        put(&(t.len() as u32).to_le_bytes())?;
        put(t.as_bytes())?;
    }
    for x in m.rows() {
        put(&x.to_le_bytes())?;
    }
    finish(path, w)
}

pub fn read_matrix(path: &Path) -> Result<EmbeddingMatrix> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let corrupt = |reason: &str| Error::CorruptHeader { path: path.to_path_buf(), reason: reason.to_string() };
    if bytes.len() < 16 || &bytes[..4] != MATRIX_MAGIC {
        return Err(corrupt("missing VMAT magic"));
    }
    let mut c = ByteCursor::new(path, &bytes, 4);
    let v = c.u32("vocabulary size")? as usize;
    let d = c.u32("dimension")? as usize;
    if c.u32("token count")? as usize != v {
        return Err(corrupt("token count differs from V"));
    }
    let mut tokens = Vec::with_capacity(v);
    for _ in 0..v {
        let len = c.u32("token length")? as usize;
        let t = std::str::from_utf8(c.take(len, "token")?).map_err(|_| corrupt("token is not UTF-8"))?;
        tokens.push(t.to_string());
    }
    let rows = c.f32s(v * d, "matrix values")?;
    if c.remaining() != 0 {
        return Err(corrupt("trailing bytes"));
    }
    Ok(EmbeddingMatrix::new(tokens, d, rows)?)
}

/// `token<TAB>count` lines.
pub fn read_token_stats(path: &Path) -> Result<TokenStats> {
    let mut stats = TokenStats::new();
    for (line, raw) in lines(path)? {
        let (tok, count) = raw.rsplit_once('\t').ok_or_else(|| Error::parse(path, line, "expected token<TAB>count"))?;
        let count: u64 = count.trim().parse().map_err(|_| Error::parse(path, line, format!("bad count {count:?}")))?;
        *stats.entry(tok.to_string()).or_default() += count;
    }
    Ok(stats)
}

pub fn write_token_stats(path: &Path, stats: &TokenStats) -> Result<()> {
    let mut w = create(path)?;
    for (t, c) in stats {
        writeln!(w, "{t}\t{c}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

/// Old row index to new row index, as a JSON object with string keys.
pub fn write_id_map(path: &Path, id_map: &BTreeMap<usize, usize>) -> Result<()> {
    let obj: serde_json::Map<String, serde_json::Value> =
        id_map.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect();
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, &obj).map_err(|e| Error::io(path, e.into()))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}
