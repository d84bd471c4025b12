//! Pure numerical operations behind the cohort and individual views.
//!
//! Every function here is deterministic: identical inputs give bitwise
//! identical outputs, and nothing holds shared mutable state.

mod align;
mod correlation;
mod eigen;
mod emotion;
mod error;
mod kde;
mod numeric;
mod pca;
mod sketch;
mod standardize;
mod timeline;

pub use align::align_series;
pub use correlation::{correlation_matrix, pearson, pearson_pairs, Correlation, CorrelationMatrix};
pub use emotion::{emotion_au_map, Emotion, EmotionAuMap, SUPPORTED_AUS};
pub use error::EngineError;
pub use kde::{kde, silverman_bandwidth, DensityCurve, KDE_GRID_PAD, KDE_GRID_POINTS};
pub use numeric::Measure;
pub use pca::{pca_embed, project, PcaResult};
pub use sketch::{
    au_variable_id, head_sketch_summary, HeadSketchSummary, SketchConfig, ASYMMETRY_FEATURES,
    EXPRESSIVITY_PARTS, HEAD_POSE_AXES,
};
pub use standardize::{standardize, Standardized};
pub use timeline::{
    bin_timeline, display_histogram, equal_time_spans, interval_means, FrameSpan, HistogramBar,
    TimelineBinning, DEFAULT_HISTOGRAM_BINS, TIMELINE_INTERVALS,
};

use crate::model::RawSeries;

/// Correlation matrix over raw series of one video. Each pair is aligned
/// with [`align_series`] before correlating; `None` entries (series the video
/// did not capture) give undefined cells.
pub fn aligned_correlation_matrix(variable_ids: Vec<String>, series: &[Option<&RawSeries>]) -> CorrelationMatrix {
    CorrelationMatrix::from_pairs(variable_ids, |i, j| match (series[i], series[j]) {
        (Some(a), Some(b)) => pearson_pairs(&align_series(a, b)),
        _ => Correlation {
            r: None,
            n: 0,
            defined: false,
        },
    })
}
