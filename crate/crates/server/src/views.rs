//! Payload construction shared by the JSON endpoints and the SVG export.

use std::collections::BTreeMap;

use dbmx_core::engine::{
    aligned_correlation_matrix, bin_timeline, correlation_matrix, display_histogram, emotion_au_map,
    head_sketch_summary, kde, pca_embed, CorrelationMatrix, DensityCurve, EmotionAuMap, FrameSpan,
    HeadSketchSummary, HistogramBar, PcaResult, SketchConfig, TimelineBinning,
};
use dbmx_core::model::{Category, Cohort, Kind, ModelError, VariableDescriptor, VideoRecord};
use serde::Serialize;

use crate::error::ApiError;
use crate::state::{AppState, FieldRange};

#[derive(Debug, Clone, Serialize)]
pub struct VideoSummary {
    pub id: String,
    pub duration_s: f64,
    pub attributes: BTreeMap<String, String>,
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohortListing {
    pub video_ids: Vec<String>,
    pub videos: Vec<VideoSummary>,
    pub attribute_keys: Vec<String>,
    pub registry: Vec<VariableDescriptor>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaView {
    #[serde(flatten)]
    pub result: PcaResult,
    pub color_by: Option<String>,
    /// Attribute value per entry of `video_ids`; `null` if the video lacks it.
    pub colors: Option<Vec<Option<String>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub video_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub variable_id: String,
    pub points: Vec<Point>,
    pub density: Option<DensityCurve>,
    pub defined: bool,
    /// Why `density` is missing.
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionsView {
    pub distributions: Vec<Distribution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesEntry {
    pub variable_id: String,
    pub category: Category,
    /// `false` when this video has no such series.
    pub available: bool,
    pub sampling_rate_hz: Option<f64>,
    pub len: usize,
    pub bars: Vec<HistogramBar>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesView {
    pub video_id: String,
    pub duration_s: f64,
    pub bins: usize,
    pub timeline: TimelineBinning,
    pub series: Vec<SeriesEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SketchView {
    pub video_id: String,
    pub interval: Option<usize>,
    pub interval_bounds_s: Option<[f64; 2]>,
    /// Frame span of the selected interval per category.
    pub frame_spans: Option<BTreeMap<Category, FrameSpan>>,
    pub summary: HeadSketchSummary,
    pub emotion_au_map: EmotionAuMap,
    /// Cohort-wide extent of each field, for color normalization.
    pub ranges: BTreeMap<String, FieldRange>,
    pub config: SketchConfig,
}

pub fn cohort(state: &AppState) -> Result<&Cohort, ApiError> {
    state.cohort().ok_or_else(ApiError::not_loaded)
}

pub fn video<'a>(cohort: &'a Cohort, id: &str) -> Result<&'a VideoRecord, ApiError> {
    cohort
        .video(id)
        .ok_or_else(|| ModelError::UnknownVideoId(id.to_string()).into())
}

/// Size limits for a variable selection. Repeats are allowed.
pub fn check_selection(state: &AppState, variables: &[String], min: usize) -> Result<(), ApiError> {
    if variables.len() < min {
        return Err(ApiError::bad_request(
            "TooFewColumns",
            format!("select at least {min} variables, got {}", variables.len()),
        ));
    }
    if variables.len() > state.max_selection() {
        return Err(ApiError::bad_request(
            "SelectionTooLarge",
            format!(
                "select at most {} variables, got {}",
                state.max_selection(),
                variables.len()
            ),
        ));
    }
    Ok(())
}

fn check_kind(cohort: &Cohort, variables: &[String], kind: Kind) -> Result<(), ApiError> {
    for v in variables {
        cohort.variable_of_kind(v, kind)?;
    }
    Ok(())
}

pub fn listing(state: &AppState) -> Result<CohortListing, ApiError> {
    let cohort = cohort(state)?;
    let videos: Vec<VideoSummary> = cohort
        .videos()
        .iter()
        .map(|v| VideoSummary {
            id: v.id.clone(),
            duration_s: v.duration_s,
            attributes: v.attributes.clone(),
            categories: cohort.category_shapes(v).into_keys().collect(),
        })
        .collect();
    Ok(CohortListing {
        video_ids: videos.iter().map(|v| v.id.clone()).collect(),
        videos,
        attribute_keys: cohort.attribute_keys().to_vec(),
        registry: cohort.registry().to_vec(),
    })
}

pub fn pca(state: &AppState, variables: &[String], color_by: Option<&str>) -> Result<PcaView, ApiError> {
    let cohort = cohort(state)?;
    check_selection(state, variables, 2)?;
    if let Some(key) = color_by {
        if !cohort.attribute_keys().iter().any(|k| k == key) {
            return Err(ApiError::bad_request(
                "UnknownAttribute",
                format!("unknown attribute `{key}`"),
            ));
        }
    }
    let matrix = cohort.derived_matrix(variables)?;
    let result = pca_embed(&matrix)?;
    let colors = color_by.map(|key| {
        result
            .video_ids
            .iter()
            .map(|id| cohort.video(id).and_then(|v| v.attributes.get(key)).cloned())
            .collect()
    });
    Ok(PcaView {
        result,
        color_by: color_by.map(str::to_string),
        colors,
    })
}

pub fn distributions(state: &AppState, variables: &[String]) -> Result<DistributionsView, ApiError> {
    let cohort = cohort(state)?;
    check_selection(state, variables, 1)?;
    check_kind(cohort, variables, Kind::Derived)?;
    let distributions = variables
        .iter()
        .map(|id| {
            let points: Vec<Point> = cohort
                .videos()
                .iter()
                .filter_map(|v| {
                    Some(Point {
                        video_id: v.id.clone(),
                        value: *v.derived.get(id)?,
                    })
                })
                .collect();
            let values: Vec<f64> = points.iter().map(|p| p.value).collect();
            let (density, error) = match kde(&values) {
                Ok(d) => (Some(d), None),
                Err(e) => (
                    None,
                    Some(ErrorInfo {
                        code: e.code().to_string(),
                        message: e.to_string(),
                    }),
                ),
            };
            Distribution {
                variable_id: id.clone(),
                points,
                defined: density.is_some(),
                density,
                error,
            }
        })
        .collect();
    Ok(DistributionsView { distributions })
}

pub fn cohort_correlation(state: &AppState, variables: &[String]) -> Result<CorrelationMatrix, ApiError> {
    let cohort = cohort(state)?;
    check_selection(state, variables, 2)?;
    check_kind(cohort, variables, Kind::Derived)?;
    let columns: Vec<(String, Vec<Option<f64>>)> = variables
        .iter()
        .map(|id| {
            let column = cohort.videos().iter().map(|v| v.derived.get(id).copied()).collect();
            (id.clone(), column)
        })
        .collect();
    Ok(correlation_matrix(&columns)?)
}

fn video_binning(cohort: &Cohort, video: &VideoRecord) -> Result<TimelineBinning, ApiError> {
    Ok(bin_timeline(video.duration_s, &cohort.category_shapes(video))?)
}

/// `variables = None` selects every raw variable in the registry.
pub fn series(
    state: &AppState,
    video_id: &str,
    variables: Option<&[String]>,
    bins: usize,
) -> Result<SeriesView, ApiError> {
    let cohort = cohort(state)?;
    let video = video(cohort, video_id)?;
    let all: Vec<String>;
    let variables = match variables {
        Some(v) => {
            check_selection(state, v, 1)?;
            v
        }
        None => {
            all = cohort
                .registry()
                .iter()
                .filter(|v| v.kind == Kind::Raw)
                .map(|v| v.id.clone())
                .collect();
            &all
        }
    };
    let mut entries = Vec::with_capacity(variables.len());
    for id in variables {
        let descriptor = cohort.variable_of_kind(id, Kind::Raw)?;
        let entry = match video.raw.get(id) {
            Some(s) => SeriesEntry {
                variable_id: id.clone(),
                category: descriptor.category,
                available: true,
                sampling_rate_hz: Some(s.sampling_rate_hz),
                len: s.len(),
                bars: display_histogram(s, bins)?,
            },
            None => {
                if bins == 0 {
                    return Err(dbmx_core::engine::EngineError::NonPositiveBins.into());
                }
                SeriesEntry {
                    variable_id: id.clone(),
                    category: descriptor.category,
                    available: false,
                    sampling_rate_hz: None,
                    len: 0,
                    bars: Vec::new(),
                }
            }
        };
        entries.push(entry);
    }
    Ok(SeriesView {
        video_id: video.id.clone(),
        duration_s: video.duration_s,
        bins,
        timeline: video_binning(cohort, video)?,
        series: entries,
    })
}

pub fn sketch(state: &AppState, video_id: &str, interval: Option<usize>) -> Result<SketchView, ApiError> {
    let cohort = cohort(state)?;
    let video = video(cohort, video_id)?;
    let binning = video_binning(cohort, video)?;
    let summary = head_sketch_summary(video, interval, Some(&binning), state.sketch_config())?;
    let (bounds, spans) = match interval {
        Some(k) => (
            Some([binning.boundaries_s[k], binning.boundaries_s[k + 1]]),
            Some(binning.frame_spans.iter().map(|(c, s)| (*c, s[k])).collect()),
        ),
        None => (None, None),
    };
    Ok(SketchView {
        video_id: video.id.clone(),
        interval,
        interval_bounds_s: bounds,
        frame_spans: spans,
        summary,
        emotion_au_map: emotion_au_map(),
        ranges: state.sketch_ranges().clone(),
        config: state.sketch_config().clone(),
    })
}

pub fn video_correlation(state: &AppState, video_id: &str, variables: &[String]) -> Result<CorrelationMatrix, ApiError> {
    let cohort = cohort(state)?;
    let video = video(cohort, video_id)?;
    check_selection(state, variables, 2)?;
    check_kind(cohort, variables, Kind::Raw)?;
    let series: Vec<_> = variables.iter().map(|id| video.raw.get(id)).collect();
    Ok(aligned_correlation_matrix(variables.to_vec(), &series))
}
