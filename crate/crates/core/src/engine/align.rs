use super::numeric::snapped_floor;
use crate::model::RawSeries;

/// Pairs samples of two series from the same video for correlation.
///
/// Equal rates pair by frame index (the longer series is truncated).
/// Otherwise the higher-rate series is linearly interpolated at the
/// timestamps of the lower-rate one; a pair is kept only when the sample and
/// both interpolation neighbours are present. Pairs are returned as
/// `(a, b)` whichever series was resampled.
pub fn align_series(a: &RawSeries, b: &RawSeries) -> Vec<(f64, f64)> {
    if a.sampling_rate_hz == b.sampling_rate_hz {
        return a
            .samples
            .iter()
            .zip(&b.samples)
            .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
            .collect();
    }

    let swapped = a.sampling_rate_hz > b.sampling_rate_hz;
    let (low, high) = if swapped { (b, a) } else { (a, b) };
    let ratio = high.sampling_rate_hz / low.sampling_rate_hz;
    low.samples
        .iter()
        .enumerate()
        .filter_map(|(i, sample)| {
            let x = (*sample)?;
            let y = interpolate(&high.samples, i as f64 * ratio)?;
            Some(if swapped { (y, x) } else { (x, y) })
        })
        .collect()
}

/// Value at fractional frame position `pos`, or `None` if it falls outside
/// the series or next to a missing sample.
fn interpolate(samples: &[Option<f64>], pos: f64) -> Option<f64> {
    let base = snapped_floor(pos);
    if base < 0.0 {
        return None;
    }
    let j = base as usize;
    let frac = pos - base;
    let left = (*samples.get(j)?)?;
    if frac <= 1e-9 {
        return Some(left);
    }
    let right = (*samples.get(j + 1)?)?;
    Some(left + frac * (right - left))
}
