//! On-disk formats. Text is UTF-8 and NFC-normalized on load.

mod aux;
mod collection;
mod embeddings;
mod matrix;
mod triplets;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use aux::{
    load_labeled_examples, load_labeled_queries, load_score_run, load_teacher_run, read_loss_curve,
    write_jsonl, write_loss_curve, write_mined, MinedRecord, ScoreRecord,
};
pub use collection::{load_corpus, load_qrels, load_queries, load_retrieval_collection, write_retrieval_collection};
pub use embeddings::{
    packed_len, read_embeddings, read_jsonl_embeddings, read_packed, write_jsonl_embeddings, write_packed,
    PACKED_MAGIC,
};
pub use matrix::{read_matrix, read_token_stats, write_id_map, write_matrix, write_token_stats, MATRIX_MAGIC};
pub use triplets::{load_triplets, parse_triplet, triplet_to_json, write_triplets, Rejection, TripletSet};

pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Non-blank lines with 1-based line numbers.
pub(crate) fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// Little-endian reader over an in-memory binary file.
pub(crate) struct ByteCursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    pub(crate) fn new(path: &'a Path, bytes: &'a [u8], pos: usize) -> Self {
        ByteCursor { path, bytes, pos }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::CorruptHeader {
                path: self.path.to_path_buf(),
                reason: format!("truncated while reading {what} at byte {}", self.pos),
            });
        }
        self.pos += n;
        Ok(&self.bytes[self.pos - n..self.pos])
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub(crate) fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let len = n.checked_mul(4).ok_or_else(|| Error::CorruptHeader {
            path: self.path.to_path_buf(),
            reason: format!("{what} length overflows"),
        })?;
        Ok(self.take(len, what)?.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect())
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut f = open(path)?;
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
