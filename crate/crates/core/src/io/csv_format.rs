//! Derived and raw CSV layouts.
//!
//! Derived: header `variable_id,value`, one row per variable.
//! Raw: header `frame,<id>,...`, then a `RATE_HZ,<r>,...` row, then one row
//! per frame. Empty cells are missing samples.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use crate::model::{Category, Kind, ModelError, RawSeries, VariableDescriptor};

use super::manifest::AdapterConfig;

pub const RATE_ROW: &str = "RATE_HZ";

pub(crate) type RegistryView<'a> = HashMap<&'a str, &'a VariableDescriptor>;

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, ModelError> {
    std::fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ModelError::MissingFile {
                path: path.to_path_buf(),
            }
        } else {
            ModelError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes)
}

fn malformed(path: &Path, row: usize, column: usize, detail: impl Into<String>) -> ModelError {
    ModelError::MalformedCsv {
        path: path.to_path_buf(),
        row,
        column,
        detail: detail.into(),
    }
}

/// Reads every record, turning csv-level errors into `MalformedCsv`.
fn records(path: &Path, bytes: &[u8]) -> Result<Vec<(usize, csv::StringRecord)>, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(strip_bom(bytes));
    let mut out = Vec::new();
    for result in reader.records() {
        match result {
            Ok(record) => {
                let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
                out.push((row, record));
            }
            Err(err) => {
                let row = err.position().map(|p| p.line() as usize).unwrap_or(0);
                return Err(malformed(path, row, 0, err.to_string()));
            }
        }
    }
    Ok(out)
}

fn parse_value(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64, ModelError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(malformed(path, row, column, format!("`{cell}` is not a finite number"))),
    }
}

fn lookup<'a>(
    registry: &RegistryView<'a>,
    adapter: &AdapterConfig,
    name: &str,
) -> Result<&'a VariableDescriptor, ModelError> {
    let id = adapter.resolve(name);
    registry
        .get(id)
        .copied()
        .ok_or_else(|| ModelError::UnknownVariableId(id.to_string()))
}

pub(crate) fn read_derived(
    path: &Path,
    registry: &RegistryView<'_>,
    adapter: &AdapterConfig,
) -> Result<BTreeMap<String, f64>, ModelError> {
    let bytes = read_file(path)?;
    let rows = records(path, &bytes)?;
    let mut out = BTreeMap::new();
    let Some(((header_row, header), body)) = rows.split_first() else {
        return Ok(out);
    };
    if header.len() != 2 || &header[0] != "variable_id" || &header[1] != "value" {
        return Err(malformed(path, *header_row, 1, "expected header `variable_id,value`"));
    }
    for (row, record) in body {
        let var = lookup(registry, adapter, &record[0])?;
        if var.kind != Kind::Derived {
            return Err(ModelError::KindMismatch {
                variable_id: var.id.clone(),
                expected: Kind::Derived,
            });
        }
        let value = parse_value(path, *row, 2, &record[1])?;
        if out.insert(var.id.clone(), value).is_some() {
            return Err(malformed(path, *row, 1, format!("duplicate variable `{}`", var.id)));
        }
    }
    Ok(out)
}

/// Parses one category file. An empty file, or one without frame rows,
/// yields no series: the modality was not captured.
pub(crate) fn read_raw(
    path: &Path,
    category: Category,
    registry: &RegistryView<'_>,
    adapter: &AdapterConfig,
) -> Result<Vec<RawSeries>, ModelError> {
    let bytes = read_file(path)?;
    let rows = records(path, &bytes)?;
    let Some(((header_row, header), body)) = rows.split_first() else {
        return Ok(Vec::new());
    };
    if header.is_empty() || &header[0] != "frame" {
        return Err(malformed(path, *header_row, 1, "first header column must be `frame`"));
    }

    let mut columns = Vec::with_capacity(header.len() - 1);
    let mut seen = HashSet::new();
    for (j, name) in header.iter().enumerate().skip(1) {
        let var = lookup(registry, adapter, name)?;
        if var.kind != Kind::Raw {
            return Err(ModelError::KindMismatch {
                variable_id: var.id.clone(),
                expected: Kind::Raw,
            });
        }
        if var.category != category {
            return Err(ModelError::CategoryMismatch {
                variable_id: var.id.clone(),
                actual: var.category,
                found: category,
            });
        }
        if !seen.insert(var.id.as_str()) {
            return Err(malformed(path, *header_row, j + 1, format!("duplicate column `{}`", var.id)));
        }
        columns.push(var.id.clone());
    }

    let Some(((rate_row, rates), frames)) = body.split_first() else {
        return Ok(Vec::new());
    };
    if &rates[0] != RATE_ROW {
        return Err(malformed(path, *rate_row, 1, format!("expected `{RATE_ROW}` row")));
    }
    let mut rate = None;
    for (j, cell) in rates.iter().enumerate().skip(1) {
        let r = cell
            .parse::<f64>()
            .map_err(|_| malformed(path, *rate_row, j + 1, format!("`{cell}` is not a sampling rate")))?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(ModelError::NonPositiveSamplingRate {
                variable_id: columns[j - 1].clone(),
                rate: r,
            });
        }
        match rate {
            None => rate = Some(r),
            Some(prev) if prev != r => {
                return Err(malformed(path, *rate_row, j + 1, "rates differ within one category file"));
            }
            Some(_) => {}
        }
    }
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let Some(rate) = rate else {
        // Header without variables: nothing to load.
        return Ok(Vec::new());
    };

    let mut samples: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(frames.len()); columns.len()];
    for (expected, (row, record)) in frames.iter().enumerate() {
        let frame = &record[0];
        if frame.parse::<usize>().ok() != Some(expected) {
            return Err(malformed(path, *row, 1, format!("expected frame {expected}, found `{frame}`")));
        }
        for (j, cell) in record.iter().enumerate().skip(1) {
            let sample = if cell.is_empty() {
                None
            } else {
                Some(parse_value(path, *row, j + 1, cell)?)
            };
            samples[j - 1].push(sample);
        }
    }

    Ok(columns
        .into_iter()
        .zip(samples)
        .map(|(id, s)| RawSeries::new(id, rate, s))
        .collect())
}

pub(crate) fn fmt_number(v: f64) -> String {
    format!("{v}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, ModelError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_io(path, e))
}

fn csv_io(path: &Path, err: csv::Error) -> ModelError {
    let source = match err.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    };
    ModelError::Io {
        path: PathBuf::from(path),
        source,
    }
}

pub(crate) fn write_derived(path: &Path, derived: &BTreeMap<String, f64>) -> Result<(), ModelError> {
    let mut w = writer(path)?;
    w.write_record(["variable_id", "value"]).map_err(|e| csv_io(path, e))?;
    for (id, value) in derived {
        w.write_record([id.as_str(), &fmt_number(*value)])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes series sharing one rate and length as a single category file.
pub(crate) fn write_raw(path: &Path, series: &[&RawSeries]) -> Result<(), ModelError> {
    let mut w = writer(path)?;
    let mut header = vec!["frame".to_string()];
    header.extend(series.iter().map(|s| s.variable_id.clone()));
    w.write_record(&header).map_err(|e| csv_io(path, e))?;

    let mut rate_row = vec![RATE_ROW.to_string()];
    rate_row.extend(series.iter().map(|s| fmt_number(s.sampling_rate_hz)));
    w.write_record(&rate_row).map_err(|e| csv_io(path, e))?;

    let len = series.first().map(|s| s.len()).unwrap_or(0);
    let mut record = Vec::with_capacity(series.len() + 1);
    for frame in 0..len {
        record.clear();
        record.push(frame.to_string());
        for s in series {
            record.push(s.samples[frame].map(fmt_number).unwrap_or_default());
        }
        w.write_record(&record).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}
