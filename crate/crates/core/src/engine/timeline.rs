//! Equal wall-time intervals over a video and their per-category frame spans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::numeric::{mean_present, snapped_floor};
use super::EngineError;
use crate::model::{Category, RawSeries, SeriesShape};

pub const TIMELINE_INTERVALS: usize = 20;
pub const DEFAULT_HISTOGRAM_BINS: usize = 100;

/// Half-open frame range `[start, end)`.
pub type FrameSpan = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineBinning {
    pub n_intervals: usize,
    /// `n_intervals + 1` ascending times; the last equals the duration.
    pub boundaries_s: Vec<f64>,
    pub frame_spans: BTreeMap<Category, Vec<FrameSpan>>,
}

impl TimelineBinning {
    pub fn spans(&self, category: Category) -> Option<&[FrameSpan]> {
        self.frame_spans.get(&category).map(Vec::as_slice)
    }
}

fn boundaries(duration_s: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| if k == n { duration_s } else { duration_s * k as f64 / n as f64 })
        .collect()
}

/// Splits `[0, duration_s]` into `n` equal-time pieces and maps them to
/// frames: span k is `[floor(t_k * rate), floor(t_{k+1} * rate))`, clamped to
/// `len`, with the last span ending at `len`. The spans partition `0..len`.
pub fn equal_time_spans(duration_s: f64, rate_hz: f64, len: usize, n: usize) -> Vec<FrameSpan> {
    let times = boundaries(duration_s, n);
    let mut starts: Vec<usize> = times[..n]
        .iter()
        .map(|t| {
            let frame = snapped_floor(t * rate_hz).max(0.0);
            (frame as usize).min(len)
        })
        .collect();
    starts.push(len);
    starts.windows(2).map(|w| (w[0], w[1])).collect()
}

pub fn bin_timeline(
    duration_s: f64,
    series: &BTreeMap<Category, SeriesShape>,
) -> Result<TimelineBinning, EngineError> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(EngineError::NonPositiveDuration(duration_s));
    }
    let frame_spans = series
        .iter()
        .map(|(category, shape)| {
            (
                *category,
                equal_time_spans(duration_s, shape.sampling_rate_hz, shape.len, TIMELINE_INTERVALS),
            )
        })
        .collect();
    Ok(TimelineBinning {
        n_intervals: TIMELINE_INTERVALS,
        boundaries_s: boundaries(duration_s, TIMELINE_INTERVALS),
        frame_spans,
    })
}

fn span_samples(series: &RawSeries, (start, end): FrameSpan) -> &[Option<f64>] {
    let len = series.samples.len();
    &series.samples[start.min(len)..end.min(len)]
}

/// Mean of the present samples in each interval; `None` for empty spans or
/// spans without any present sample.
pub fn interval_means(
    series: &RawSeries,
    binning: &TimelineBinning,
    category: Category,
) -> Result<Vec<Option<f64>>, EngineError> {
    let spans = binning
        .spans(category)
        .ok_or_else(|| EngineError::UnknownCategory(category.to_string()))?;
    Ok(spans
        .iter()
        .map(|&span| mean_present(span_samples(series, span)).0)
        .collect())
}

/// Mean over one interval.
pub(crate) fn interval_mean(series: &RawSeries, span: FrameSpan) -> Option<f64> {
    mean_present(span_samples(series, span)).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBar {
    pub t_start_s: f64,
    pub t_end_s: f64,
    /// `None` when no sample in the bar was captured (a visible gap).
    pub mean: Option<f64>,
    pub count: usize,
}

/// Downsamples a series into `n_bins` equal-time bars over its own duration.
pub fn display_histogram(series: &RawSeries, n_bins: usize) -> Result<Vec<HistogramBar>, EngineError> {
    if n_bins == 0 {
        return Err(EngineError::NonPositiveBins);
    }
    let duration = series.duration_s();
    let times = boundaries(duration, n_bins);
    let spans = equal_time_spans(duration, series.sampling_rate_hz, series.len(), n_bins);
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(b, span)| {
            let (mean, count) = mean_present(span_samples(series, span));
            HistogramBar {
                t_start_s: times[b],
                t_end_s: times[b + 1],
                mean,
                count,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes(category: Category, rate: f64, len: usize) -> BTreeMap<Category, SeriesShape> {
        [(category, SeriesShape { sampling_rate_hz: rate, len })].into()
    }

    #[test]
    fn exact_division() {
        let b = bin_timeline(60.0, &shapes(Category::Facial, 30.0, 1800)).unwrap();
        assert_eq!(b.boundaries_s.len(), 21);
        assert_eq!(b.boundaries_s[20], 60.0);
        let spans = b.spans(Category::Facial).unwrap();
        assert_eq!(spans.len(), 20);
        for (k, &(s, e)) in spans.iter().enumerate() {
            assert_eq!((s, e), (90 * k, 90 * (k + 1)));
        }
    }

    #[test]
    fn degenerate_short_series_has_empty_spans() {
        let b = bin_timeline(1.0, &shapes(Category::Movement, 10.0, 10)).unwrap();
        let spans = b.spans(Category::Movement).unwrap();
        assert!(spans.iter().any(|(s, e)| s == e));
        let series = RawSeries::new("x", 10.0, vec![Some(1.0); 10]);
        let means = interval_means(&series, &b, Category::Movement).unwrap();
        for (&(s, e), m) in spans.iter().zip(&means) {
            assert_eq!(m.is_none(), s == e);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            bin_timeline(0.0, &BTreeMap::new()).unwrap_err(),
            EngineError::NonPositiveDuration(0.0)
        );
        let b = bin_timeline(1.0, &BTreeMap::new()).unwrap();
        let s = RawSeries::new("x", 1.0, vec![Some(1.0)]);
        assert!(matches!(
            interval_means(&s, &b, Category::Facial),
            Err(EngineError::UnknownCategory(_))
        ));
        assert_eq!(display_histogram(&s, 0).unwrap_err(), EngineError::NonPositiveBins);
    }

    #[test]
    fn constant_and_index_series() {
        let constant = RawSeries::new("c", 30.0, vec![Some(2.5); 1800]);
        let b = bin_timeline(60.0, &shapes(Category::Facial, 30.0, 1800)).unwrap();
        assert!(interval_means(&constant, &b, Category::Facial)
            .unwrap()
            .iter()
            .all(|m| *m == Some(2.5)));

        let index = RawSeries::new("i", 1.0, (0..20).map(|i| Some(i as f64)).collect());
        let b = bin_timeline(20.0, &shapes(Category::Facial, 1.0, 20)).unwrap();
        let means = interval_means(&index, &b, Category::Facial).unwrap();
        assert_eq!(means, (0..20).map(|i| Some(i as f64)).collect::<Vec<_>>());
    }

    #[test]
    fn histogram_gap_then_mean() {
        let mut samples: Vec<Option<f64>> = (0..100).map(|i| Some(i as f64)).collect();
        for s in &mut samples[..50] {
            *s = None;
        }
        let series = RawSeries::new("x", 10.0, samples);
        let bars = display_histogram(&series, 2).unwrap();
        assert_eq!(bars[0].count, 0);
        assert_eq!(bars[0].mean, None);
        assert_eq!(bars[1].count, 50);
        assert_eq!(bars[1].mean, Some(74.5));
        assert_eq!((bars[1].t_start_s, bars[1].t_end_s), (5.0, 10.0));
    }

    #[test]
    fn histogram_identity_at_full_resolution() {
        let samples: Vec<Option<f64>> = (0..97).map(|i| if i % 7 == 0 { None } else { Some(i as f64 * 0.3) }).collect();
        let series = RawSeries::new("x", 29.97, samples.clone());
        let bars = display_histogram(&series, samples.len()).unwrap();
        for (bar, s) in bars.iter().zip(&samples) {
            assert_eq!(bar.mean, *s);
            assert_eq!(bar.count, usize::from(s.is_some()));
        }
    }
}
