//! CSV ingestion and export of metric datasets.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::schema::{position_ci, Dataset, FeatureSchema, Sample, LABEL_COLUMN};
use crate::error::{Error, Result};

/// Loads a dataset whose header names all 16 features plus `is_god_class`.
/// Columns may appear in any order; extra columns are ignored.
pub fn load_csv(path: &Path, schema: &FeatureSchema) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, &name, schema)
}

pub fn read_csv<R: Read>(reader: R, name: &str, schema: &FeatureSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::structural(format!("{name}: empty file")));
    }
    let cols: Vec<&str> = header.iter().collect();
    let feature_idx = schema.locate(&cols)?;
    let label_idx = position_ci(&cols, LABEL_COLUMN).ok_or_else(|| Error::Schema {
        column: LABEL_COLUMN.to_string(),
    })?;

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(samples.len() + 2);
        let cell = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                row,
                message: format!("column `{}`: `{}` is not a number", cols[idx], raw),
            })
        };
        let features = feature_idx
            .iter()
            .map(|&i| cell(i))
            .collect::<Result<Vec<_>>>()?;
        let label_value = cell(label_idx)?;
        let label = if label_value == 0.0 {
            0
        } else if label_value == 1.0 {
            1
        } else {
            return Err(Error::Parse {
                row,
                message: format!("`{LABEL_COLUMN}` must be 0 or 1, got {label_value}"),
            });
        };
        let sample = Sample::new(features, label).map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::structural(format!("{name}: no data rows")));
    }
    Ok(Dataset::new(name, samples))
}

/// Writes a dataset with the canonical header (16 features then the label).
pub fn write_csv(path: &Path, data: &Dataset, schema: &FeatureSchema) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let mut header: Vec<&str> = schema.names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)
        .map_err(|e| Error::io(path, e.into()))?;
    for s in &data.samples {
        let mut row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
        row.push(s.label.to_string());
        w.write_record(&row)
            .map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
