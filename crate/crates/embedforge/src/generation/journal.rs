//! Append-only campaign journal, one JSON object per finished slot.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use embedforge_core::Category;
use serde::{Deserialize, Serialize};

use super::transport::Usage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub category: Category,
    pub slot: u64,
    pub prompt_hash: String,
    pub status: Status,
    /// Requests spent on the slot.
    pub attempt: u32,
    pub tier: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triplet: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub usage: Usage,
    #[serde(default)]
    pub cost: f64,
}

/// Replays a journal. A torn final line (from a killed writer) is dropped
/// and truncated away so later appends stay well-formed; corruption
/// anywhere else is an error.
pub fn read_journal(path: &Path) -> Result<Vec<JournalEntry>> {
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => f.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut entries = Vec::new();
    let mut good_len = 0usize;
    let mut pos = 0usize;
    let mut line_no = 0usize;
    while pos < bytes.len() {
        line_no += 1;
        let end = bytes[pos..].iter().position(|b| *b == b'\n').map(|i| pos + i);
        let line = &bytes[pos..end.unwrap_or(bytes.len())];
        let parsed = std::str::from_utf8(line).ok().and_then(|s| {
            if s.trim().is_empty() {
                Some(None)
            } else {
                serde_json::from_str::<JournalEntry>(s).ok().map(Some)
            }
        });
        match (parsed, end) {
            (Some(entry), Some(end)) => {
                entries.extend(entry);
                pos = end + 1;
                good_len = pos;
            }
            (_, None) => {
                log::warn!("{}: dropping torn final line {line_no}", path.display());
                break;
            }
            (None, Some(_)) => {
                return Err(Error::Journal { path: path.to_path_buf(), reason: format!("line {line_no} is not a journal entry") });
            }
        }
    }
    if good_len < bytes.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        f.set_len(good_len as u64).map_err(|e| Error::io(path, e))?;
    }
    Ok(entries)
}

/// Appends entries, flushing after each so a kill loses at most one line.
pub struct JournalWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JournalWriter {
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(JournalWriter { path: path.to_path_buf(), out: BufWriter::new(f) })
    }

    pub fn append(&mut self, entry: &JournalEntry) -> Result<()> {
        let line = serde_json::to_string(entry).expect("journal entry serializes");
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}
