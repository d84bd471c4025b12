use serde::{Deserialize, Serialize};

use super::numeric::ordered_sum;
use super::EngineError;
use crate::model::DerivedMatrix;

/// Z-scored copy of a [`DerivedMatrix`] with constant columns removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub video_ids: Vec<String>,
    /// Retained columns, in input order.
    pub variable_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    /// Population standard deviations (divisor N).
    pub stds: Vec<f64>,
    pub dropped_variable_ids: Vec<String>,
}

/// Population mean and standard deviation, independent of row order.
pub(crate) fn column_moments(column: &[f64]) -> (f64, f64) {
    let n = column.len() as f64;
    let mean = ordered_sum(&mut column.to_vec()) / n;
    let mut sq: Vec<f64> = column.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = ordered_sum(&mut sq) / n;
    (mean, var.sqrt())
}

fn is_constant(column: &[f64], std: f64) -> bool {
    let scale = column.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    std <= 1e-12 * scale
}

pub fn standardize(m: &DerivedMatrix) -> Result<Standardized, EngineError> {
    if m.n_rows() < 2 {
        return Err(EngineError::TooFewRows {
            needed: 2,
            found: m.n_rows(),
        });
    }

    let mut keep = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    let mut dropped = Vec::new();
    for (j, id) in m.variable_ids.iter().enumerate() {
        let column = m.column(j);
        let (mean, std) = column_moments(&column);
        if is_constant(&column, std) {
            dropped.push(id.clone());
        } else {
            keep.push(j);
            means.push(mean);
            stds.push(std);
        }
    }
    if keep.is_empty() {
        return Err(EngineError::AllColumnsConstant);
    }

    let values = m
        .values
        .iter()
        .map(|row| {
            keep.iter()
                .enumerate()
                .map(|(k, &j)| (row[j] - means[k]) / stds[k])
                .collect()
        })
        .collect();

    Ok(Standardized {
        video_ids: m.video_ids.clone(),
        variable_ids: keep.iter().map(|&j| m.variable_ids[j].clone()).collect(),
        values,
        means,
        stds,
        dropped_variable_ids: dropped,
    })
}
