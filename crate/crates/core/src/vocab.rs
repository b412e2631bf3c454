//! Vocabulary trimming of an embedding matrix.
//!
//! Only the token embedding rows change; every kept row is copied bit for bit.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Token occurrence counts over a reference corpus.
pub type TokenStats = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    dim: usize,
    rows: Vec<f32>,
}

impl EmbeddingMatrix {
    /// `rows` is row-major, `tokens.len() * dim` values.
    pub fn new(tokens: Vec<String>, dim: usize, rows: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding matrix", "dimension must be positive"));
        }
        if rows.len() != tokens.len() * dim {
            return Err(Error::DimensionMismatch { expected: tokens.len() * dim, found: rows.len() });
        }
        if let Some(i) = rows.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid("embedding matrix", format!("non-finite value in row {}", i / dim)));
        }
        let mut index = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::invalid("embedding matrix", format!("duplicate token {t:?}")));
            }
        }
        Ok(EmbeddingMatrix { tokens, index, dim, rows })
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> &[f32] {
        &self.rows
    }

    pub fn token_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

/// Result of a trim: the smaller matrix and old row → new row.
#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed {
    pub matrix: EmbeddingMatrix,
    pub id_map: BTreeMap<usize, usize>,
}

/// Keeps `specials` plus the `target - |specials|` most frequent tokens
/// (ties by lower original index). New rows are ordered specials first (in
/// the given order), then by original index.
pub fn trim_vocabulary(
    mat: &EmbeddingMatrix,
    stats: &TokenStats,
    target: usize,
    specials: &[String],
) -> Result<Trimmed> {
    let mut special_rows = Vec::new();
    let mut seen = BTreeSet::new();
    for s in specials {
        let i = mat.token_index(s).ok_or_else(|| Error::UnknownSpecial(s.clone()))?;
        if seen.insert(i) {
            special_rows.push(i);
        }
    }
    if target < special_rows.len() {
        return Err(Error::TargetTooSmall { target, specials: special_rows.len() });
    }

    let mut candidates: Vec<(u64, usize)> = (0..mat.vocab_size())
        .filter(|i| !seen.contains(i))
        .map(|i| (stats.get(&mat.tokens[i]).copied().unwrap_or(0), i))
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut regular: Vec<usize> =
        candidates.into_iter().take(target - special_rows.len()).map(|(_, i)| i).collect();
    regular.sort_unstable();

    let order: Vec<usize> = special_rows.into_iter().chain(regular).collect();
    let mut tokens = Vec::with_capacity(order.len());
    let mut rows = Vec::with_capacity(order.len() * mat.dim);
    let mut id_map = BTreeMap::new();
    for (new, &old) in order.iter().enumerate() {
        tokens.push(mat.tokens[old].clone());
        rows.extend_from_slice(mat.row(old));
        id_map.insert(old, new);
    }
    Ok(Trimmed { matrix: EmbeddingMatrix::new(tokens, mat.dim, rows)?, id_map })
}

/// Fraction of all model parameters removed by shrinking the vocabulary
/// from `old_v` to `new_v` rows of width `dim`.
pub fn reduction_ratio(old_v: u64, new_v: u64, dim: u64, total_params: u64) -> Result<f64> {
    if new_v > old_v {
        return Err(Error::InvalidCounts(format!("new vocabulary {new_v} larger than old {old_v}")));
    }
    let removed = (old_v - new_v)
        .checked_mul(dim)
        .ok_or_else(|| Error::InvalidCounts("parameter count overflow".to_string()))?;
    if total_params <= removed {
        return Err(Error::InvalidCounts(format!("total {total_params} does not exceed removed {removed}")));
    }
    Ok(removed as f64 / total_params as f64)
}
