//! Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::EngineError;

pub const KDE_GRID_POINTS: usize = 128;
/// Grid padding beyond the data range, in bandwidths.
pub const KDE_GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `0.9 * min(sigma, IQR / 1.34) * n^(-1/5)` with the sample standard
/// deviation; falls back to `sigma` when the IQR is zero.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt();
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
    0.9 * spread * n.powf(-0.2)
}

pub fn kde(values: &[f64]) -> Result<DensityCurve, EngineError> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.len() < 2 {
        return Err(EngineError::TooFewValues(sorted.len()));
    }
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Err(EngineError::DegenerateSpread);
    }

    let h = silverman_bandwidth(&sorted);
    let lo = min - KDE_GRID_PAD * h;
    let hi = max + KDE_GRID_PAD * h;
    let last = (KDE_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..KDE_GRID_POINTS)
        .map(|i| {
            if i == KDE_GRID_POINTS - 1 {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            }
        })
        .collect();

    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            let s: f64 = sorted
                .iter()
                .map(|&xi| {
                    let u = (x - xi) / h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            s * norm
        })
        .collect();

    Ok(DensityCurve {
        grid,
        density,
        bandwidth: h,
    })
}
