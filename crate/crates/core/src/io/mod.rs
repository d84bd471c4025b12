//! On-disk cohort format: a JSON manifest plus per-video CSV files.

mod csv_format;
mod manifest;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use csv_format::RATE_ROW;
pub use manifest::{AdapterConfig, Manifest, VideoEntry, MANIFEST_FILE};
pub use report::{modality_warnings, Issue, ValidationReport, Warning};

use crate::model::{Category, Cohort, ModelError, RawSeries, VariableDescriptor, VideoRecord};
use csv_format::RegistryView;

/// Accepts either a manifest file or a directory containing `manifest.json`.
fn manifest_path(path: &Path, adapter: &AdapterConfig) -> PathBuf {
    if path.is_dir() {
        path.join(adapter.manifest_file())
    } else {
        path.to_path_buf()
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ModelError> {
    let bytes = csv_format::read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| ModelError::MalformedManifest {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

fn adapt_registry(registry: &[VariableDescriptor], adapter: &AdapterConfig) -> Vec<VariableDescriptor> {
    registry
        .iter()
        .map(|v| VariableDescriptor {
            id: adapter.resolve(&v.id).to_string(),
            ..v.clone()
        })
        .collect()
}

fn read_video(
    base: &Path,
    entry: &VideoEntry,
    registry: &RegistryView<'_>,
    adapter: &AdapterConfig,
) -> Result<VideoRecord, ModelError> {
    let mut video = VideoRecord::new(entry.id.clone(), entry.duration_s);
    video.attributes = entry.attributes.clone();
    if let Some(rel) = &entry.derived_csv {
        video.derived = csv_format::read_derived(&base.join(rel), registry, adapter)?;
    }
    for (category, rel) in &entry.raw_csvs {
        for series in csv_format::read_raw(&base.join(rel), *category, registry, adapter)? {
            if video.raw.contains_key(&series.variable_id) {
                return Err(ModelError::MalformedManifest {
                    path: base.join(rel),
                    detail: format!("series `{}` listed twice", series.variable_id),
                });
            }
            video.raw.insert(series.variable_id.clone(), series);
        }
    }
    Ok(video)
}

/// Loads and validates a cohort; fails on the first violation.
pub fn load_cohort(manifest: &Path) -> Result<Cohort, ModelError> {
    load_cohort_with(manifest, &AdapterConfig::default())
}

pub fn load_cohort_with(manifest: &Path, adapter: &AdapterConfig) -> Result<Cohort, ModelError> {
    let path = manifest_path(manifest, adapter);
    let parsed = read_manifest(&path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let registry = adapt_registry(&parsed.registry, adapter);
    let view: RegistryView<'_> = registry.iter().map(|v| (v.id.as_str(), v)).collect();
    let videos = parsed
        .videos
        .iter()
        .map(|entry| read_video(base, entry, &view, adapter))
        .collect::<Result<Vec<_>, _>>()?;
    Cohort::new(registry, videos)
}

/// Result of [`inspect`]: the cohort when it loaded cleanly, and the report.
#[derive(Debug)]
pub struct Inspection {
    pub cohort: Option<Cohort>,
    pub report: ValidationReport,
}

/// Validates every video and collects all problems instead of stopping at
/// the first. Returns `Err` only when the manifest itself is unreadable.
pub fn inspect(path: &Path, adapter: &AdapterConfig) -> Result<Inspection, ModelError> {
    let path = manifest_path(path, adapter);
    let parsed = match read_manifest(&path) {
        Ok(m) => m,
        Err(err @ (ModelError::MissingFile { .. } | ModelError::Io { .. })) => return Err(err),
        Err(err) => {
            return Ok(Inspection {
                cohort: None,
                report: ValidationReport {
                    manifest: path.display().to_string(),
                    errors: vec![Issue::from_error(&err, None)],
                    ..Default::default()
                },
            })
        }
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let registry = adapt_registry(&parsed.registry, adapter);
    let view: RegistryView<'_> = registry.iter().map(|v| (v.id.as_str(), v)).collect();

    let mut report = ValidationReport {
        manifest: path.display().to_string(),
        videos_checked: parsed.videos.len(),
        ..Default::default()
    };
    let mut videos = Vec::with_capacity(parsed.videos.len());
    for entry in &parsed.videos {
        match read_video(base, entry, &view, adapter) {
            Ok(v) => videos.push(v),
            Err(err) => report.errors.push(Issue::from_error(&err, Some(&entry.id))),
        }
    }
    if !report.errors.is_empty() {
        return Ok(Inspection { cohort: None, report });
    }
    match Cohort::new(registry, videos) {
        Ok(cohort) => {
            report.warnings = modality_warnings(&cohort);
            Ok(Inspection {
                cohort: Some(cohort),
                report,
            })
        }
        Err(err) => {
            report.errors.push(Issue::from_error(&err, None));
            Ok(Inspection { cohort: None, report })
        }
    }
}

fn safe_component(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn create_dir(path: &Path) -> Result<(), ModelError> {
    std::fs::create_dir_all(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `cohort` in canonical layout under `out_dir`:
/// `manifest.json` plus `videos/<nnnn>_<id>/{derived,<category>}.csv`.
/// Output bytes depend only on the cohort.
pub fn write_cohort(cohort: &Cohort, out_dir: &Path) -> Result<(), ModelError> {
    create_dir(out_dir)?;
    let mut entries = Vec::with_capacity(cohort.videos().len());
    for (i, video) in cohort.videos().iter().enumerate() {
        let rel_dir = format!("videos/{:04}_{}", i, safe_component(&video.id));
        let dir = out_dir.join(&rel_dir);
        create_dir(&dir)?;

        let derived_rel = format!("{rel_dir}/derived.csv");
        csv_format::write_derived(&out_dir.join(&derived_rel), &video.derived)?;

        let mut by_category: BTreeMap<Category, Vec<&RawSeries>> = BTreeMap::new();
        for var in cohort.registry() {
            if let Some(series) = video.raw.get(&var.id) {
                by_category.entry(var.category).or_default().push(series);
            }
        }
        let mut raw_csvs = BTreeMap::new();
        for (category, series) in by_category {
            let rel = format!("{rel_dir}/{category}.csv");
            csv_format::write_raw(&out_dir.join(&rel), &series)?;
            raw_csvs.insert(category, rel);
        }

        entries.push(VideoEntry {
            id: video.id.clone(),
            duration_s: video.duration_s,
            attributes: video.attributes.clone(),
            derived_csv: Some(derived_rel),
            raw_csvs,
        });
    }

    let manifest = Manifest {
        videos: entries,
        registry: cohort.registry().to_vec(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, json).map_err(|source| ModelError::Io { path, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Kind;
    use std::fs;

    fn registry_json() -> &'static str {
        r#"[
            {"id": "aco_int_mean", "category": "acoustics", "kind": "derived", "label": "Intensity", "units": "dB"},
            {"id": "aco_int", "category": "acoustics", "kind": "raw", "label": "Intensity", "units": "dB"},
            {"id": "mov_roll", "category": "movement", "kind": "raw", "label": "Roll", "units": "deg"}
        ]"#
    }

    fn write(dir: &Path, rel: &str, content: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    fn manifest(dir: &Path, videos: &str) {
        write(
            dir,
            MANIFEST_FILE,
            &format!(r#"{{"videos": {videos}, "registry": {}}}"#, registry_json()),
        );
    }

    #[test]
    fn empty_manifest_loads() {
        let dir = tempfile::tempdir().unwrap();
        manifest(dir.path(), "[]");
        let cohort = load_cohort(dir.path()).unwrap();
        assert!(cohort.videos().is_empty());
        assert_eq!(cohort.registry().len(), 3);
    }

    #[test]
    fn loads_raw_with_missing_samples() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/derived.csv", "variable_id,value\naco_int_mean,61.5\n");
        write(dir.path(), "a/mov.csv", "frame,mov_roll\nRATE_HZ,2\n0,1.5\n1,\n2,-3\n");
        manifest(
            dir.path(),
            r#"[{"id": "a", "duration_s": 1.5, "attributes": {"task": "read"},
                 "derived_csv": "a/derived.csv", "raw_csvs": {"movement": "a/mov.csv"}}]"#,
        );
        let cohort = load_cohort(&dir.path().join(MANIFEST_FILE)).unwrap();
        let v = cohort.video("a").unwrap();
        assert_eq!(v.derived["aco_int_mean"], 61.5);
        let s = &v.raw["mov_roll"];
        assert_eq!(s.sampling_rate_hz, 2.0);
        assert_eq!(s.samples, vec![Some(1.5), None, Some(-3.0)]);
        assert_eq!(cohort.attribute_keys(), ["task"]);
    }

    #[test]
    fn malformed_rate_row_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/mov.csv", "frame,mov_roll\nRATE_HZ,abc\n0,1\n");
        manifest(
            dir.path(),
            r#"[{"id": "a", "duration_s": 1, "raw_csvs": {"movement": "a/mov.csv"}}]"#,
        );
        match load_cohort(dir.path()).unwrap_err() {
            ModelError::MalformedCsv { row, column, path, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, 2);
                assert!(path.ends_with("a/mov.csv"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rate_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/mov.csv", "frame,mov_roll\nRATE_HZ,0\n0,1\n");
        manifest(
            dir.path(),
            r#"[{"id": "a", "duration_s": 1, "raw_csvs": {"movement": "a/mov.csv"}}]"#,
        );
        assert!(matches!(
            load_cohort(dir.path()),
            Err(ModelError::NonPositiveSamplingRate { .. })
        ));
    }

    #[test]
    fn missing_csv_and_unknown_variable() {
        let dir = tempfile::tempdir().unwrap();
        manifest(dir.path(), r#"[{"id": "a", "duration_s": 1, "derived_csv": "nope.csv"}]"#);
        assert!(matches!(load_cohort(dir.path()), Err(ModelError::MissingFile { .. })));

        write(dir.path(), "d.csv", "variable_id,value\nwho_knows,1\n");
        manifest(dir.path(), r#"[{"id": "a", "duration_s": 1, "derived_csv": "d.csv"}]"#);
        assert!(matches!(load_cohort(dir.path()), Err(ModelError::UnknownVariableId(_))));
    }

    #[test]
    fn duplicate_ids_in_manifest() {
        let dir = tempfile::tempdir().unwrap();
        manifest(
            dir.path(),
            r#"[{"id": "v1", "duration_s": 1}, {"id": "v1", "duration_s": 2}]"#,
        );
        assert!(matches!(load_cohort(dir.path()), Err(ModelError::DuplicateVideoId(_))));
    }

    #[test]
    fn empty_category_file_warns_but_loads() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/aco.csv", "");
        write(dir.path(), "a/d.csv", "variable_id,value\naco_int_mean,60\n");
        manifest(
            dir.path(),
            r#"[{"id": "a", "duration_s": 1, "derived_csv": "a/d.csv", "raw_csvs": {"acoustics": "a/aco.csv"}}]"#,
        );
        let inspection = inspect(dir.path(), &AdapterConfig::default()).unwrap();
        assert!(inspection.report.is_ok());
        let codes: Vec<_> = inspection.report.warnings.iter().map(|w| w.code.as_str()).collect();
        assert!(codes.contains(&"missing:acoustics"));
        assert!(inspection.cohort.unwrap().video("a").unwrap().raw.is_empty());
    }

    #[test]
    fn inspect_collects_errors_from_every_video() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "frame,mov_roll\nRATE_HZ,x\n0,1\n");
        write(dir.path(), "b.csv", "frame,mov_roll\nRATE_HZ,30\n0,1\n5,1\n");
        manifest(
            dir.path(),
            r#"[{"id": "a", "duration_s": 1, "raw_csvs": {"movement": "a.csv"}},
                {"id": "b", "duration_s": 1, "raw_csvs": {"movement": "b.csv"}}]"#,
        );
        let inspection = inspect(dir.path(), &AdapterConfig::default()).unwrap();
        assert!(inspection.cohort.is_none());
        assert_eq!(inspection.report.errors.len(), 2);
        assert_eq!(inspection.report.errors[1].row, Some(4));
    }

    #[test]
    fn adapter_renames_columns() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "frame,pose_Rz\nRATE_HZ,30\n0,1\n");
        write(
            dir.path(),
            MANIFEST_FILE,
            r#"{"videos": [{"id": "a", "duration_s": 1, "raw_csvs": {"movement": "a.csv"}}],
                "registry": [{"id": "pose_Rz", "category": "movement", "kind": "raw", "label": "Roll"}]}"#,
        );
        let adapter = AdapterConfig {
            manifest: None,
            rename: [("pose_Rz".to_string(), "mov_roll".to_string())].into(),
        };
        let cohort = load_cohort_with(dir.path(), &adapter).unwrap();
        assert_eq!(cohort.registry()[0].id, "mov_roll");
        assert_eq!(cohort.registry()[0].kind, Kind::Raw);
        assert!(cohort.video("a").unwrap().raw.contains_key("mov_roll"));
    }

    #[test]
    fn write_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a/d.csv", "variable_id,value\naco_int_mean,0.1\n");
        write(dir.path(), "a/mov.csv", "frame,mov_roll\nRATE_HZ,29.97\n0,1e-3\n1,\n2,-3.25\n");
        manifest(
            dir.path(),
            r#"[{"id": "a/b c", "duration_s": 1.5, "attributes": {"task": "x"},
                 "derived_csv": "a/d.csv", "raw_csvs": {"movement": "a/mov.csv"}}]"#,
        );
        let cohort = load_cohort(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        write_cohort(&cohort, out.path()).unwrap();
        let again = load_cohort(out.path()).unwrap();
        assert_eq!(cohort, again);

        let out2 = tempfile::tempdir().unwrap();
        write_cohort(&again, out2.path()).unwrap();
        assert_eq!(
            fs::read(out.path().join(MANIFEST_FILE)).unwrap(),
            fs::read(out2.path().join(MANIFEST_FILE)).unwrap()
        );
    }
}
