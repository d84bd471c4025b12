mod common;

use std::collections::BTreeMap;

use common::exact_spans;
use dbmx_core::engine::{
    bin_timeline, display_histogram, equal_time_spans, head_sketch_summary, interval_means, SketchConfig,
    TIMELINE_INTERVALS,
};
use dbmx_core::model::{Category, RawSeries, SeriesShape};
use dbmx_core::synth::{generate, SyntheticSpec};
use proptest::prelude::*;

#[test]
fn uneven_rate_span_sizes() {
    // 60 s at 99.7 Hz -> 5982 frames, 299.1 frames per interval.
    let spans = equal_time_spans(60.0, 99.7, 5982, 20);
    assert_eq!(spans, exact_spans(60_000, 997, 10, 5982, 20));
    let sizes: std::collections::BTreeSet<usize> = spans.iter().map(|(s, e)| e - s).collect();
    assert_eq!(sizes, [299, 300].into());
    assert_eq!(spans.iter().map(|(s, e)| e - s).sum::<usize>(), 5982);
}

fn triple() -> impl Strategy<Value = (u64, u64, u64, usize)> {
    // duration in ms, rate as num/den, and a length near duration * rate
    (1_000u64..600_000, 1u64..2000, prop::sample::select(vec![1u64, 2, 4, 5, 10, 100]), 0usize..3)
        .prop_map(|(ms, num, den, slack)| {
            let len = (ms as u128 * num as u128 / (1000 * den as u128)) as usize;
            (ms, num, den, len.saturating_sub(slack))
        })
}

proptest! {
    #[test]
    fn spans_partition_and_match_exact_arithmetic((ms, num, den, len) in triple()) {
        let duration = ms as f64 / 1000.0;
        let rate = num as f64 / den as f64;
        let spans = equal_time_spans(duration, rate, len, TIMELINE_INTERVALS);
        prop_assert_eq!(spans.len(), TIMELINE_INTERVALS);
        prop_assert_eq!(spans[0].0, 0);
        prop_assert_eq!(spans[TIMELINE_INTERVALS - 1].1, len);
        for w in spans.windows(2) {
            prop_assert_eq!(w[0].1, w[1].0);
            prop_assert!(w[0].0 <= w[0].1);
        }
        prop_assert_eq!(spans, exact_spans(ms, num, den, len, TIMELINE_INTERVALS));
    }

    #[test]
    fn interval_means_recompose_whole_mean(
        (ms, num, den, len) in triple().prop_filter("non-empty", |t| t.3 > 0 && t.3 < 50_000),
        missing_every in 2usize..20,
    ) {
        let duration = ms as f64 / 1000.0;
        let rate = num as f64 / den as f64;
        let samples: Vec<Option<f64>> = (0..len)
            .map(|i| (i % missing_every != 0).then(|| (i as f64 * 0.37).sin() * 10.0 + i as f64 * 1e-3))
            .collect();
        let series = RawSeries::new("x", rate, samples.clone());
        let shapes: BTreeMap<Category, SeriesShape> = [(Category::Facial, series.shape())].into();
        let binning = bin_timeline(duration, &shapes).unwrap();
        let means = interval_means(&series, &binning, Category::Facial).unwrap();
        let spans = binning.spans(Category::Facial).unwrap();

        let mut weighted = 0.0;
        let mut total = 0usize;
        for (&(s, e), m) in spans.iter().zip(&means) {
            let count = samples[s..e].iter().flatten().count();
            prop_assert_eq!(m.is_some(), count > 0);
            if let Some(m) = m {
                weighted += m * count as f64;
                total += count;
            }
        }
        let present: Vec<f64> = samples.iter().flatten().copied().collect();
        if total > 0 {
            let whole = present.iter().sum::<f64>() / present.len() as f64;
            let scale = present.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            prop_assert!((weighted / total as f64 - whole).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn histogram_partitions_series(len in 1usize..5000, rate in 1.0f64..200.0, bins in 1usize..150) {
        let series = RawSeries::new("x", rate, (0..len).map(|i| Some(i as f64)).collect());
        let bars = display_histogram(&series, bins).unwrap();
        prop_assert_eq!(bars.len(), bins);
        prop_assert_eq!(bars.iter().map(|b| b.count).sum::<usize>(), len);
        for w in bars.windows(2) {
            prop_assert_eq!(w[0].t_end_s, w[1].t_start_s);
        }
    }
}

#[test]
fn twenty_bar_histogram_matches_interval_means() {
    let s = generate(&SyntheticSpec {
        n_videos: 4,
        n_silent: 0,
        ..SyntheticSpec::default()
    })
    .unwrap();
    for video in s.cohort.videos() {
        let series = &video.raw["fac_sad_exp"];
        let shapes: BTreeMap<Category, SeriesShape> = [(Category::Facial, series.shape())].into();
        let binning = bin_timeline(series.duration_s(), &shapes).unwrap();
        let means = interval_means(series, &binning, Category::Facial).unwrap();
        let bars = display_histogram(series, TIMELINE_INTERVALS).unwrap();
        let bar_means: Vec<Option<f64>> = bars.iter().map(|b| b.mean).collect();
        assert_eq!(means, bar_means);
    }
}

#[test]
fn sketch_interval_values_equal_interval_means() {
    let s = generate(&SyntheticSpec {
        n_videos: 3,
        n_silent: 0,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let config = SketchConfig::default();
    for video in s.cohort.videos() {
        let binning = bin_timeline(video.duration_s, &s.cohort.category_shapes(video)).unwrap();
        for k in [0, 7, TIMELINE_INTERVALS - 1] {
            let sketch = head_sketch_summary(video, Some(k), Some(&binning), &config).unwrap();
            let roll = interval_means(&video.raw["mov_roll"], &binning, Category::Movement).unwrap()[k];
            assert_eq!(sketch.head_pose["roll"].0, roll);
            let au12 = interval_means(&video.raw["fac_au12_int"], &binning, Category::Facial).unwrap()[k];
            assert_eq!(sketch.au_intensity[&12].0, au12);
            let pain = interval_means(&video.raw["fac_pain_exp"], &binning, Category::Facial).unwrap()[k];
            assert_eq!(sketch.pain.0, pain);
        }
    }
}
