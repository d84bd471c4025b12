//! Prototype action-unit sets for the seven basic emotions (EMFACS).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Action units OpenFace can extract.
pub const SUPPORTED_AUS: [u8; 18] = [1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 20, 23, 25, 26, 28, 45];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Happiness,
    Sadness,
    Anger,
    Fear,
    Surprise,
    Disgust,
    Contempt,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Happiness,
        Emotion::Sadness,
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Surprise,
        Emotion::Disgust,
        Emotion::Contempt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Emotion::Happiness => "happiness",
            Emotion::Sadness => "sadness",
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Surprise => "surprise",
            Emotion::Disgust => "disgust",
            Emotion::Contempt => "contempt",
        }
    }

    /// Prototype action units.
    pub fn action_units(&self) -> &'static [u8] {
        match self {
            Emotion::Happiness => &[6, 12],
            Emotion::Sadness => &[1, 4, 15],
            Emotion::Surprise => &[1, 2, 5, 26],
            Emotion::Fear => &[1, 2, 4, 5, 7, 20, 26],
            Emotion::Anger => &[4, 5, 7, 23],
            Emotion::Disgust => &[9, 15, 17],
            Emotion::Contempt => &[12, 14],
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown emotion `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionAuMap(pub BTreeMap<Emotion, BTreeSet<u8>>);

impl EmotionAuMap {
    pub fn get(&self, emotion: Emotion) -> &BTreeSet<u8> {
        &self.0[&emotion]
    }
}

pub fn emotion_au_map() -> EmotionAuMap {
    EmotionAuMap(
        Emotion::ALL
            .into_iter()
            .map(|e| (e, e.action_units().iter().copied().collect()))
            .collect(),
    )
}
