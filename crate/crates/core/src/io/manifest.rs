use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Category, VariableDescriptor};

/// File name of the manifest inside a cohort directory.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub videos: Vec<VideoEntry>,
    pub registry: Vec<VariableDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: String,
    pub duration_s: f64,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    /// Relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_csv: Option<String>,
    #[serde(default)]
    pub raw_csvs: BTreeMap<Category, String>,
}

/// Maps upstream column names onto registry ids during ingest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    /// Manifest file name inside the input directory.
    #[serde(default)]
    pub manifest: Option<String>,
    /// Source name -> variable id. Applied to the registry, derived rows and
    /// raw CSV headers alike.
    #[serde(default)]
    pub rename: BTreeMap<String, String>,
}

impl AdapterConfig {
    pub fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.rename.get(name).map(String::as_str).unwrap_or(name)
    }

    pub fn manifest_file(&self) -> &str {
        self.manifest.as_deref().unwrap_or(MANIFEST_FILE)
    }
}
