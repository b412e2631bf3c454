//! Per-task and per-dataset averages of main scores.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TaskKind;
use crate::error::{Error, Result};
use crate::num;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub dataset: String,
    pub task: TaskKind,
    pub main_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub datasets: Vec<DatasetScore>,
    pub task_means: BTreeMap<TaskKind, f64>,
    /// Unweighted mean over datasets.
    pub avg_d: f64,
    /// Mean of the per-task means.
    pub avg_t: f64,
}

/// Builds the report. Nothing is rounded here; round at presentation.
pub fn aggregate(scores: Vec<DatasetScore>) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(Error::EmptyReport);
    }
    if let Some(s) = scores.iter().find(|s| !s.main_score.is_finite()) {
        return Err(Error::invalid("dataset score", format!("{} is not finite", s.dataset)));
    }
    let mut by_task: BTreeMap<TaskKind, Vec<f64>> = BTreeMap::new();
    for s in &scores {
        by_task.entry(s.task).or_default().push(s.main_score);
    }
    let task_means: BTreeMap<TaskKind, f64> = by_task.iter().map(|(t, v)| (*t, num::mean(v))).collect();
    let all: Vec<f64> = scores.iter().map(|s| s.main_score).collect();
    let means: Vec<f64> = task_means.values().copied().collect();
    Ok(EvalReport { avg_d: num::mean(&all), avg_t: num::mean(&means), task_means, datasets: scores })
}

/// Aggregates from per-task means and dataset counts, treating every
/// dataset of a task as scoring the task mean.
pub fn aggregate_task_means(rows: &[(TaskKind, f64, usize)]) -> Result<EvalReport> {
    let mut scores = Vec::new();
    for (task, mean, count) in rows {
        if *count == 0 {
            return Err(Error::invalid("task row", format!("{task} has no datasets")));
        }
        for i in 0..*count {
            scores.push(DatasetScore { dataset: format!("{task}-{i}"), task: *task, main_score: *mean });
        }
    }
    aggregate(scores)
}
