//! Result rows and the per-point summary, with their CSV files.
//!
//! `results.csv` columns: `solver,sweep_axis,sweep_value,trial,seed,nmse,
//! iterations,wall_ms,error`. A failed solve leaves `nmse` and `iterations`
//! empty and fills `error`; `wall_ms` is empty when wall time is not recorded.
//!
//! `summary.csv` columns: `solver,sweep_axis,sweep_value,trials,failures,
//! median_nmse,mean_nmse,median_wall_ms`, over the successful rows of each
//! (point, solver).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub solver: String,
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub trial: usize,
    /// Seed of the scene, shared by every solver at this (point, trial).
    pub seed: u64,
    pub nmse: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub trials: usize,
    pub failures: usize,
    pub median_nmse: Option<f64>,
    pub mean_nmse: Option<f64>,
    pub median_wall_ms: Option<f64>,
}

/// Median of `values` (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// One summary row per (sweep value, solver), in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u64, &str)> = Vec::new();
    for r in rows {
        let key = (r.sweep_value.to_bits(), r.solver.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(value_bits, solver)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.sweep_value.to_bits() == value_bits && r.solver == solver)
                .collect();
            let nmse: Vec<f64> = group.iter().filter_map(|r| r.nmse).collect();
            let wall: Vec<f64> = group
                .iter()
                .filter(|r| r.nmse.is_some())
                .filter_map(|r| r.wall_ms)
                .collect();
            SummaryRow {
                solver: solver.to_string(),
                sweep_axis: group[0].sweep_axis.clone(),
                sweep_value: f64::from_bits(value_bits),
                trials: group.len(),
                failures: group.iter().filter(|r| r.error.is_some()).count(),
                median_nmse: median(&nmse),
                mean_nmse: mean(&nmse),
                median_wall_ms: median(&wall),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| HarnessError::csv(path, e)))
        .collect()
}
