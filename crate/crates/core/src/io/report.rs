use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{Category, Cohort, Kind, ModelError};

/// Outcome of validating a cohort directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub manifest: String,
    pub videos_checked: usize,
    pub warnings: Vec<Warning>,
    pub errors: Vec<Issue>,
}

/// Something a researcher should see but that does not block loading, such
/// as a modality that was never captured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub video_id: String,
    pub code: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl Issue {
    pub fn from_error(err: &ModelError, video_id: Option<&str>) -> Self {
        let (file, row, column) = match err {
            ModelError::MalformedCsv {
                path, row, column, ..
            } => (Some(path.display().to_string()), Some(*row), Some(*column)),
            ModelError::MissingFile { path }
            | ModelError::Io { path, .. }
            | ModelError::MalformedManifest { path, .. } => (Some(path.display().to_string()), None, None),
            _ => (None, None, None),
        };
        Self {
            code: err.code().to_string(),
            message: err.to_string(),
            video_id: video_id.map(str::to_string),
            file,
            row,
            column,
        }
    }
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: {} video(s), {} warning(s), {} error(s)",
            self.manifest,
            self.videos_checked,
            self.warnings.len(),
            self.errors.len()
        );
        for w in &self.warnings {
            let _ = writeln!(out, "warning [{}] {}: {}", w.video_id, w.code, w.detail);
        }
        for e in &self.errors {
            let mut location = String::new();
            if let Some(v) = &e.video_id {
                let _ = write!(location, "[{v}] ");
            }
            if let Some(f) = &e.file {
                let _ = write!(location, "{f}");
                if let Some(r) = e.row {
                    let _ = write!(location, ":row {r}");
                }
                location.push(' ');
            }
            let _ = writeln!(out, "error {location}{}: {}", e.code, e.message);
        }
        out
    }
}

/// Per-video warnings for modalities that are absent or never captured.
pub fn modality_warnings(cohort: &Cohort) -> Vec<Warning> {
    let mut warnings = Vec::new();
    for video in cohort.videos() {
        for category in Category::ALL {
            let expects_raw = cohort.variables_in(category, Kind::Raw).next().is_some();
            let expects_derived = cohort.variables_in(category, Kind::Derived).next().is_some();
            let has_raw = cohort
                .variables_in(category, Kind::Raw)
                .any(|v| video.raw.contains_key(&v.id));
            let has_derived = cohort
                .variables_in(category, Kind::Derived)
                .any(|v| video.derived.contains_key(&v.id));
            let detail = match (expects_raw && !has_raw, expects_derived && !has_derived) {
                (true, true) => "no raw series and no derived values",
                (true, false) => "no raw series",
                (false, true) => "no derived values",
                (false, false) => continue,
            };
            warnings.push(Warning {
                video_id: video.id.clone(),
                code: format!("missing:{category}"),
                detail: detail.to_string(),
            });
        }
        for series in video.raw.values() {
            if series.present_count() == 0 {
                warnings.push(Warning {
                    video_id: video.id.clone(),
                    code: format!("all-missing:{}", series.variable_id),
                    detail: format!("all {} frames missing", series.len()),
                });
            }
        }
    }
    warnings
}
