use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use dbmx_core::engine::{head_sketch_summary, HeadSketchSummary, Measure, SketchConfig};
use dbmx_core::io::load_cohort;
use dbmx_core::model::{Cohort, ModelError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_SELECTION: usize = 32;
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub bind_address: String,
    /// Allowed origins; `*` allows any.
    pub cors_origins: Vec<String>,
    pub max_selection: usize,
    /// Static UI bundle served at `/`, if any.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            bind_address: DEFAULT_BIND.to_string(),
            cors_origins: Vec::new(),
            max_selection: DEFAULT_MAX_SELECTION,
            ui_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("max_selection must be at least 2, got {0}")]
    MaxSelection(usize),
    #[error("CORS origin `{0}` is not a valid header value")]
    CorsOrigin(String),
    #[error(transparent)]
    Load(#[from] ModelError),
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_selection < 2 {
            return Err(ConfigError::MaxSelection(self.max_selection));
        }
        for origin in &self.cors_origins {
            if origin != "*" && axum::http::HeaderValue::from_str(origin).is_err() {
                return Err(ConfigError::CorsOrigin(origin.clone()));
            }
        }
        Ok(())
    }
}

/// Cohort-wide extent of one sketch field over whole-video means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRange {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Immutable state shared by all handlers.
#[derive(Debug, Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    cohort: Option<Cohort>,
    max_selection: usize,
    sketch: SketchConfig,
    sketch_ranges: BTreeMap<String, FieldRange>,
}

impl AppState {
    pub fn new(cohort: Option<Cohort>, max_selection: usize) -> Self {
        Self::with_sketch_config(cohort, max_selection, SketchConfig::default())
    }

    pub fn with_sketch_config(cohort: Option<Cohort>, max_selection: usize, sketch: SketchConfig) -> Self {
        let sketch_ranges = cohort
            .as_ref()
            .map(|c| sketch_ranges(c, &sketch))
            .unwrap_or_default();
        Self {
            inner: Arc::new(Inner {
                cohort,
                max_selection,
                sketch,
                sketch_ranges,
            }),
        }
    }

    /// Validates the config and loads the cohort before anything is served.
    pub fn load(config: &ServiceConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let cohort = load_cohort(&config.data_dir)?;
        Ok(Self::new(Some(cohort), config.max_selection))
    }

    pub fn cohort(&self) -> Option<&Cohort> {
        self.inner.cohort.as_ref()
    }

    pub fn max_selection(&self) -> usize {
        self.inner.max_selection
    }

    pub fn sketch_config(&self) -> &SketchConfig {
        &self.inner.sketch
    }

    pub fn sketch_ranges(&self) -> &BTreeMap<String, FieldRange> {
        &self.inner.sketch_ranges
    }
}

/// Flattens a summary to `field` / `field.key` entries.
pub fn sketch_fields(s: &HeadSketchSummary) -> Vec<(String, Measure)> {
    let mut out = Vec::new();
    for (k, m) in &s.asymmetry {
        out.push((format!("asymmetry.{k}"), *m));
    }
    out.push(("pain".to_string(), s.pain));
    for (k, m) in &s.expressivity {
        out.push((format!("expressivity.{k}"), *m));
    }
    for (k, m) in &s.au_intensity {
        out.push((format!("au_intensity.{k}"), *m));
    }
    for (k, m) in &s.head_pose {
        out.push((format!("head_pose.{k}"), *m));
    }
    out
}

fn sketch_ranges(cohort: &Cohort, config: &SketchConfig) -> BTreeMap<String, FieldRange> {
    let mut ranges: BTreeMap<String, FieldRange> = BTreeMap::new();
    for video in cohort.videos() {
        let summary = head_sketch_summary(video, None, None, config).expect("whole-video mode cannot fail");
        for (field, m) in sketch_fields(&summary) {
            let range = ranges.entry(field).or_insert(FieldRange { min: None, max: None });
            if let Some(v) = m.0 {
                range.min = Some(range.min.map_or(v, |x| x.min(v)));
                range.max = Some(range.max.map_or(v, |x| x.max(v)));
            }
        }
    }
    ranges
}
