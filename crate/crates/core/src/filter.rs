//! Margin filter over reranker scores: keep a triplet iff
//! `0 < s_pos - s_neg < C`, strict at both ends.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankScore {
    pub id: String,
    pub s_pos: f64,
    pub s_neg: f64,
}

impl RerankScore {
    pub fn validate(&self) -> Result<()> {
        for value in [self.s_pos, self.s_neg] {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::ScoreOutOfRange { id: self.id.clone(), value });
            }
        }
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        self.s_pos - self.s_neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub threshold_c: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { threshold_c: 0.96 }
    }
}

impl FilterConfig {
    pub fn new(threshold_c: f64) -> Result<Self> {
        if !(threshold_c > 0.0 && threshold_c <= 1.0) {
            return Err(Error::invalid("filter config", "threshold C must lie in (0, 1]"));
        }
        Ok(FilterConfig { threshold_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    #[serde(rename = "non-positive margin")]
    NonPositiveMargin,
    #[serde(rename = "margin ≥ C")]
    MarginAtLeastC,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NonPositiveMargin => "non-positive margin",
            RejectReason::MarginAtLeastC => "margin ≥ C",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<String>,
    pub rejected: Vec<(String, RejectReason)>,
}

/// Verdict for a single score under `cfg`.
pub fn judge(score: &RerankScore, cfg: &FilterConfig) -> core::result::Result<(), RejectReason> {
    let margin = score.margin();
    if margin <= 0.0 {
        Err(RejectReason::NonPositiveMargin)
    } else if margin >= cfg.threshold_c {
        Err(RejectReason::MarginAtLeastC)
    } else {
        Ok(())
    }
}

/// Partitions `scores` into kept and rejected ids, preserving input order.
pub fn filter_triplets(scores: &[RerankScore], cfg: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for s in scores {
        match judge(s, cfg) {
            Ok(()) => out.kept.push(s.id.clone()),
            Err(reason) => out.rejected.push((s.id.clone(), reason)),
        }
    }
    out
}
