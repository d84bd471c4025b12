//! In-memory representation of a DBM cohort.
//!
//! A [`Cohort`] is built once (usually by [`crate::io::load_cohort`]) and is
//! immutable afterwards. Missing modalities are represented by absent map
//! entries and missing frames by `None` samples; nothing is imputed here.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed overshoot of `len / rate` past the declared video duration.
pub const DURATION_TOLERANCE: f64 = 0.05;

/// The four audiovisual DBM domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Speech,
    Acoustics,
    Facial,
    Movement,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Speech,
        Category::Acoustics,
        Category::Facial,
        Category::Movement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Speech => "speech",
            Category::Acoustics => "acoustics",
            Category::Facial => "facial",
            Category::Movement => "movement",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// Whether a variable is a per-frame measurement or a per-video summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Raw,
    Derived,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Raw => "raw",
            Kind::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDescriptor {
    pub id: String,
    pub category: Category,
    pub kind: Kind,
    pub label: String,
    #[serde(default)]
    pub units: String,
}

/// Frame-by-frame measurement. `None` marks a frame that was not captured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub variable_id: String,
    pub sampling_rate_hz: f64,
    pub samples: Vec<Option<f64>>,
}

impl RawSeries {
    pub fn new(
        variable_id: impl Into<String>,
        sampling_rate_hz: f64,
        samples: Vec<Option<f64>>,
    ) -> Self {
        Self {
            variable_id: variable_id.into(),
            sampling_rate_hz,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Implied duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate_hz
    }

    pub fn shape(&self) -> SeriesShape {
        SeriesShape {
            sampling_rate_hz: self.sampling_rate_hz,
            len: self.samples.len(),
        }
    }

    pub fn present_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_some()).count()
    }
}

/// Sampling rate and length of a series, all that timeline binning needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesShape {
    pub sampling_rate_hz: f64,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub duration_s: f64,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    #[serde(default)]
    pub derived: BTreeMap<String, f64>,
    #[serde(default)]
    pub raw: BTreeMap<String, RawSeries>,
}

impl VideoRecord {
    pub fn new(id: impl Into<String>, duration_s: f64) -> Self {
        Self {
            id: id.into(),
            duration_s,
            attributes: BTreeMap::new(),
            derived: BTreeMap::new(),
            raw: BTreeMap::new(),
        }
    }
}

/// A video left out of a matrix-shaped result, with the reason why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub video_id: String,
    pub reason: String,
}

/// Complete-case matrix of derived values for a variable selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedMatrix {
    pub variable_ids: Vec<String>,
    pub video_ids: Vec<String>,
    /// Row-major, one row per entry of `video_ids`.
    pub values: Vec<Vec<f64>>,
    pub excluded_video_ids: Vec<Exclusion>,
}

impl DerivedMatrix {
    /// Builds a matrix directly from rows, without a cohort behind it.
    pub fn from_rows(
        variable_ids: Vec<String>,
        video_ids: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        if values.len() != video_ids.len() {
            return Err(ModelError::InvalidMatrix(format!(
                "{} rows for {} video ids",
                values.len(),
                video_ids.len()
            )));
        }
        if let Some(row) = values.iter().find(|r| r.len() != variable_ids.len()) {
            return Err(ModelError::InvalidMatrix(format!(
                "row of width {} for {} columns",
                row.len(),
                variable_ids.len()
            )));
        }
        Ok(Self {
            variable_ids,
            video_ids,
            values,
            excluded_video_ids: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.video_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.variable_ids.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("missing file: {}", path.display())]
    MissingFile { path: PathBuf },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {}: {detail}", path.display())]
    MalformedManifest { path: PathBuf, detail: String },
    #[error("malformed CSV {} at row {row}, column {column}: {detail}", path.display())]
    MalformedCsv {
        path: PathBuf,
        row: usize,
        column: usize,
        detail: String,
    },
    #[error("duplicate video id `{0}`")]
    DuplicateVideoId(String),
    #[error("duplicate variable id `{0}` in registry")]
    DuplicateVariableId(String),
    #[error("unknown variable id `{0}`")]
    UnknownVariableId(String),
    #[error("unknown video id `{0}`")]
    UnknownVideoId(String),
    #[error("variable `{variable_id}` is not a {expected} variable")]
    KindMismatch { variable_id: String, expected: Kind },
    #[error("variable `{variable_id}` belongs to {actual}, found under {found}")]
    CategoryMismatch {
        variable_id: String,
        actual: Category,
        found: Category,
    },
    #[error("non-positive sampling rate {rate} for `{variable_id}`")]
    NonPositiveSamplingRate { variable_id: String, rate: f64 },
    #[error("video `{0}` has a non-positive duration")]
    NonPositiveDuration(String),
    #[error("series `{variable_id}` of video `{video_id}` is empty")]
    EmptySeries { video_id: String, variable_id: String },
    #[error("series `{variable_id}` of video `{video_id}` spans {series_s}s, longer than {duration_s}s")]
    SeriesExceedsDuration {
        video_id: String,
        variable_id: String,
        series_s: f64,
        duration_s: f64,
    },
    #[error("video `{video_id}`: {category} series disagree on rate or length")]
    InconsistentCategory { video_id: String, category: Category },
    #[error("derived value `{variable_id}` of video `{video_id}` is not finite")]
    NonFiniteValue { video_id: String, variable_id: String },
    #[error("empty variable selection")]
    EmptySelection,
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

impl ModelError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::MissingFile { .. } => "MissingFile",
            ModelError::Io { .. } => "IoError",
            ModelError::MalformedManifest { .. } => "MalformedManifest",
            ModelError::MalformedCsv { .. } => "MalformedCsv",
            ModelError::DuplicateVideoId(_) => "DuplicateVideoId",
            ModelError::DuplicateVariableId(_) => "DuplicateVariableId",
            ModelError::UnknownVariableId(_) => "UnknownVariableId",
            ModelError::UnknownVideoId(_) => "UnknownVideoId",
            ModelError::KindMismatch { .. } => "KindMismatch",
            ModelError::CategoryMismatch { .. } => "CategoryMismatch",
            ModelError::NonPositiveSamplingRate { .. } => "NonPositiveSamplingRate",
            ModelError::NonPositiveDuration(_) => "NonPositiveDuration",
            ModelError::EmptySeries { .. } => "EmptySeries",
            ModelError::SeriesExceedsDuration { .. } => "SeriesExceedsDuration",
            ModelError::InconsistentCategory { .. } => "InconsistentCategory",
            ModelError::NonFiniteValue { .. } => "NonFiniteValue",
            ModelError::EmptySelection => "EmptySelection",
            ModelError::InvalidMatrix(_) => "InvalidMatrix",
        }
    }

    /// I/O problems as opposed to content that fails validation.
    pub fn is_io(&self) -> bool {
        matches!(self, ModelError::Io { .. })
    }
}

/// A validated, immutable cohort of videos.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    videos: Vec<VideoRecord>,
    registry: Vec<VariableDescriptor>,
    attribute_keys: Vec<String>,
    video_index: HashMap<String, usize>,
    variable_index: HashMap<String, usize>,
}

impl Cohort {
    pub fn new(
        registry: Vec<VariableDescriptor>,
        videos: Vec<VideoRecord>,
    ) -> Result<Self, ModelError> {
        let mut variable_index = HashMap::with_capacity(registry.len());
        for (i, v) in registry.iter().enumerate() {
            if variable_index.insert(v.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateVariableId(v.id.clone()));
            }
        }

        let mut video_index = HashMap::with_capacity(videos.len());
        let mut keys = BTreeSet::new();
        for (i, video) in videos.iter().enumerate() {
            if video_index.insert(video.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateVideoId(video.id.clone()));
            }
            validate_video(video, &registry, &variable_index)?;
            keys.extend(video.attributes.keys().cloned());
        }

        Ok(Self {
            videos,
            registry,
            attribute_keys: keys.into_iter().collect(),
            video_index,
            variable_index,
        })
    }

    pub fn videos(&self) -> &[VideoRecord] {
        &self.videos
    }

    pub fn registry(&self) -> &[VariableDescriptor] {
        &self.registry
    }

    pub fn attribute_keys(&self) -> &[String] {
        &self.attribute_keys
    }

    pub fn video(&self, id: &str) -> Option<&VideoRecord> {
        self.video_index.get(id).map(|&i| &self.videos[i])
    }

    pub fn variable(&self, id: &str) -> Option<&VariableDescriptor> {
        self.variable_index.get(id).map(|&i| &self.registry[i])
    }

    /// Looks up `id` and checks that it has the expected kind.
    pub fn variable_of_kind(&self, id: &str, kind: Kind) -> Result<&VariableDescriptor, ModelError> {
        let var = self
            .variable(id)
            .ok_or_else(|| ModelError::UnknownVariableId(id.to_string()))?;
        if var.kind != kind {
            return Err(ModelError::KindMismatch {
                variable_id: id.to_string(),
                expected: kind,
            });
        }
        Ok(var)
    }

    /// Complete-case matrix for `selection`; videos lacking any selected
    /// variable are excluded with reason `missing:<variable_id>`.
    pub fn derived_matrix(&self, selection: &[String]) -> Result<DerivedMatrix, ModelError> {
        if selection.is_empty() {
            return Err(ModelError::EmptySelection);
        }
        for id in selection {
            self.variable_of_kind(id, Kind::Derived)?;
        }

        let mut video_ids = Vec::new();
        let mut values = Vec::new();
        let mut excluded = Vec::new();
        'videos: for video in &self.videos {
            let mut row = Vec::with_capacity(selection.len());
            for id in selection {
                match video.derived.get(id) {
                    Some(&v) => row.push(v),
                    None => {
                        excluded.push(Exclusion {
                            video_id: video.id.clone(),
                            reason: format!("missing:{id}"),
                        });
                        continue 'videos;
                    }
                }
            }
            video_ids.push(video.id.clone());
            values.push(row);
        }

        Ok(DerivedMatrix {
            variable_ids: selection.to_vec(),
            video_ids,
            values,
            excluded_video_ids: excluded,
        })
    }

    /// The stored raw series, unmodified. `Ok(None)` when the variable is
    /// valid but this video did not capture it.
    pub fn get_series(&self, video_id: &str, variable_id: &str) -> Result<Option<&RawSeries>, ModelError> {
        let video = self
            .video(video_id)
            .ok_or_else(|| ModelError::UnknownVideoId(video_id.to_string()))?;
        self.variable_of_kind(variable_id, Kind::Raw)?;
        Ok(video.raw.get(variable_id))
    }

    /// Rate and length shared by the video's raw series in each category.
    pub fn category_shapes(&self, video: &VideoRecord) -> BTreeMap<Category, SeriesShape> {
        let mut shapes = BTreeMap::new();
        for series in video.raw.values() {
            if let Some(var) = self.variable(&series.variable_id) {
                shapes.entry(var.category).or_insert_with(|| series.shape());
            }
        }
        shapes
    }

    /// Registry entries of one category and kind, in registry order.
    pub fn variables_in(&self, category: Category, kind: Kind) -> impl Iterator<Item = &VariableDescriptor> {
        self.registry
            .iter()
            .filter(move |v| v.category == category && v.kind == kind)
    }
}

fn validate_video(
    video: &VideoRecord,
    registry: &[VariableDescriptor],
    index: &HashMap<String, usize>,
) -> Result<(), ModelError> {
    if !(video.duration_s > 0.0 && video.duration_s.is_finite()) {
        return Err(ModelError::NonPositiveDuration(video.id.clone()));
    }

    let lookup = |id: &str| {
        index
            .get(id)
            .map(|&i| &registry[i])
            .ok_or_else(|| ModelError::UnknownVariableId(id.to_string()))
    };

    for (id, value) in &video.derived {
        let var = lookup(id)?;
        if var.kind != Kind::Derived {
            return Err(ModelError::KindMismatch {
                variable_id: id.clone(),
                expected: Kind::Derived,
            });
        }
        if !value.is_finite() {
            return Err(ModelError::NonFiniteValue {
                video_id: video.id.clone(),
                variable_id: id.clone(),
            });
        }
    }

    let mut shapes: BTreeMap<Category, SeriesShape> = BTreeMap::new();
    for (key, series) in &video.raw {
        if key != &series.variable_id {
            return Err(ModelError::UnknownVariableId(key.clone()));
        }
        let var = lookup(key)?;
        if var.kind != Kind::Raw {
            return Err(ModelError::KindMismatch {
                variable_id: key.clone(),
                expected: Kind::Raw,
            });
        }
        let rate = series.sampling_rate_hz;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(ModelError::NonPositiveSamplingRate {
                variable_id: key.clone(),
                rate,
            });
        }
        if series.is_empty() {
            return Err(ModelError::EmptySeries {
                video_id: video.id.clone(),
                variable_id: key.clone(),
            });
        }
        if series.samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteValue {
                video_id: video.id.clone(),
                variable_id: key.clone(),
            });
        }
        let series_s = series.duration_s();
        if series_s > video.duration_s * (1.0 + DURATION_TOLERANCE) {
            return Err(ModelError::SeriesExceedsDuration {
                video_id: video.id.clone(),
                variable_id: key.clone(),
                series_s,
                duration_s: video.duration_s,
            });
        }
        // One CSV per category: all its columns share rate and frame count.
        let shape = series.shape();
        match shapes.get(&var.category) {
            Some(existing) if *existing != shape => {
                return Err(ModelError::InconsistentCategory {
                    video_id: video.id.clone(),
                    category: var.category,
                });
            }
            Some(_) => {}
            None => {
                shapes.insert(var.category, shape);
            }
        }
    }
    Ok(())
}
