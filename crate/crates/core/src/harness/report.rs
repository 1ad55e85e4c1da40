//! CSV record types written by the harness.

use std::fs::OpenOptions;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluation of one sparsification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub dataset: String,
    pub method: String,
    pub edge_kept_ratio: f64,
    pub metric: String,
    pub seed: u64,
    /// Empty when the cell failed.
    pub value: Option<f64>,
    /// Method parameters needed to reproduce the row, `key=value;...`.
    pub params: String,
    pub error: Option<String>,
}

/// Mean over seeds of one (method, ratio, metric) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub dataset: String,
    pub method: String,
    pub ratio: f64,
    pub metric: String,
    pub mean: f64,
    pub n_seeds: usize,
    /// Best mean in its (ratio, metric) column.
    pub best: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    /// Policy updates so far.
    pub step: u64,
    pub epsilon: f64,
    pub loss: Option<f64>,
    pub mean_reward: f64,
    pub buffer_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpannerRow {
    pub t: usize,
    /// Mean edge-kept ratio of the spanners; the learned method is run at it.
    pub mean_ratio: f64,
    pub spanner_rspsp: f64,
    pub rl_rspsp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub subgraph_len: usize,
    pub edge_kept_ratio: f64,
    pub metric: String,
    pub seed: u64,
    pub value: f64,
    /// Wall time of the sparsification alone.
    pub seconds: f64,
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
