//! Head-sketch summaries: the mean values behind the Asym, Pain, Expr, AUs
//! and Mov masks, over a whole video or one timeline interval.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::emotion::SUPPORTED_AUS;
use super::numeric::{mean_present, Measure};
use super::timeline::{interval_mean, TimelineBinning};
use super::EngineError;
use crate::model::{Category, VideoRecord};

/// Which raw variables feed each sketch field. Facial fields read facial
/// spans, head pose reads movement spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    /// Facial feature -> asymmetry series.
    pub asymmetry: BTreeMap<String, String>,
    pub pain: String,
    /// `overall`, `upper`, `lower` -> expressivity series.
    pub expressivity: BTreeMap<String, String>,
    pub au_intensity: BTreeMap<u8, String>,
    /// `yaw`, `roll`, `pitch` -> pose series.
    pub head_pose: BTreeMap<String, String>,
}

pub const ASYMMETRY_FEATURES: [&str; 4] = ["eyebrow", "eye", "cheek", "mouth"];
pub const EXPRESSIVITY_PARTS: [&str; 3] = ["overall", "upper", "lower"];
pub const HEAD_POSE_AXES: [&str; 3] = ["yaw", "roll", "pitch"];

pub fn au_variable_id(au: u8) -> String {
    format!("fac_au{au:02}_int")
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            asymmetry: ASYMMETRY_FEATURES
                .iter()
                .map(|f| (f.to_string(), format!("fac_asym_{f}")))
                .collect(),
            pain: "fac_pain_exp".to_string(),
            expressivity: EXPRESSIVITY_PARTS
                .iter()
                .map(|p| (p.to_string(), format!("fac_exp_{p}")))
                .collect(),
            au_intensity: SUPPORTED_AUS.iter().map(|&au| (au, au_variable_id(au))).collect(),
            head_pose: HEAD_POSE_AXES
                .iter()
                .map(|a| (a.to_string(), format!("mov_{a}")))
                .collect(),
        }
    }
}

impl SketchConfig {
    /// Every raw variable referenced, with the category whose spans apply.
    pub fn variables(&self) -> Vec<(&str, Category)> {
        let facial = self
            .asymmetry
            .values()
            .chain(std::iter::once(&self.pain))
            .chain(self.expressivity.values())
            .chain(self.au_intensity.values())
            .map(|v| (v.as_str(), Category::Facial));
        let movement = self.head_pose.values().map(|v| (v.as_str(), Category::Movement));
        facial.chain(movement).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSketchSummary {
    pub asymmetry: BTreeMap<String, Measure>,
    pub pain: Measure,
    pub expressivity: BTreeMap<String, Measure>,
    pub au_intensity: BTreeMap<u8, Measure>,
    pub head_pose: BTreeMap<String, Measure>,
    /// `None` for whole-video means.
    pub interval: Option<usize>,
}

pub fn head_sketch_summary(
    video: &VideoRecord,
    interval: Option<usize>,
    binning: Option<&TimelineBinning>,
    config: &SketchConfig,
) -> Result<HeadSketchSummary, EngineError> {
    let span_for = match interval {
        None => None,
        Some(k) => {
            let binning = binning.ok_or(EngineError::MissingBinning)?;
            if k >= binning.n_intervals {
                return Err(EngineError::UnknownInterval {
                    index: k,
                    count: binning.n_intervals,
                });
            }
            Some((k, binning))
        }
    };

    let field = |variable_id: &str, category: Category| -> Measure {
        let Some(series) = video.raw.get(variable_id) else {
            return Measure(None);
        };
        match span_for {
            None => Measure(mean_present(&series.samples).0),
            Some((k, binning)) => match binning.spans(category) {
                Some(spans) => Measure(interval_mean(series, spans[k])),
                None => Measure(None),
            },
        }
    };
    let facial = |id: &String| field(id, Category::Facial);

    Ok(HeadSketchSummary {
        asymmetry: config.asymmetry.iter().map(|(k, v)| (k.clone(), facial(v))).collect(),
        pain: facial(&config.pain),
        expressivity: config.expressivity.iter().map(|(k, v)| (k.clone(), facial(v))).collect(),
        au_intensity: config.au_intensity.iter().map(|(k, v)| (*k, facial(v))).collect(),
        head_pose: config
            .head_pose
            .iter()
            .map(|(k, v)| (k.clone(), field(v, Category::Movement)))
            .collect(),
        interval,
    })
}
