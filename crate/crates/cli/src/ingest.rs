//! CSV ingestion. Files need a header row; every column other than the label
//! must be numeric. Label values are mapped to class indices in order of
//! first appearance.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;
use uq_core::ensemble::Dataset;

/// Cell values treated as missing.
pub const MISSING_MARKERS: [&str; 3] = ["", "?", "NA"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("label column `{0}` is not in the header")]
    MissingLabelColumn(String),
    #[error("line {line}, column `{column}`: `{value}` is not a number")]
    NonNumericFeature { line: usize, column: String, value: String },
    #[error("line {line}, column `{column}`: missing value")]
    MissingValue { line: usize, column: String },
    #[error("no usable rows remain ({skipped} skipped for missing values)")]
    EmptyAfterFiltering { skipped: usize },
    #[error(transparent)]
    Dataset(#[from] uq_core::Error),
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Original label strings, indexed by class.
    pub class_names: Vec<String>,
    /// File line numbers (header is line 1) of rows dropped for missing values.
    pub skipped_lines: Vec<usize>,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IngestError::FileNotFound(path.to_path_buf()),
        _ => IngestError::Io(e),
    })
}

fn is_missing(cell: &str) -> bool {
    MISSING_MARKERS.contains(&cell.trim())
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<f64, IngestError> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| IngestError::NonNumericFeature {
            line,
            column: column.to_string(),
            value: cell.to_string(),
        })
}

pub fn ingest_csv(path: &Path, label: &str) -> Result<Ingested, IngestError> {
    read_labelled(open(path)?, label)
}

/// Training data: rows with a missing cell are skipped and reported, any
/// other unparseable feature is an error.
pub fn read_labelled<R: Read>(input: R, label: &str) -> Result<Ingested, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_col = header
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| IngestError::MissingLabelColumn(label.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut skipped_lines = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.iter().any(is_missing) {
            skipped_lines.push(line);
            continue;
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for (j, cell) in record.iter().enumerate() {
            if j != label_col {
                row.push(parse_cell(cell, line, &header[j])?);
            }
        }
        let name = record[label_col].to_string();
        let next = class_names.len();
        let class = *class_index.entry(name.clone()).or_insert_with(|| {
            class_names.push(name);
            next
        });
        features.push(row);
        labels.push(class);
    }
    if features.is_empty() {
        return Err(IngestError::EmptyAfterFiltering {
            skipped: skipped_lines.len(),
        });
    }
    let dataset = Dataset::new(features, labels, class_names.len())?.with_feature_names(feature_names)?;
    Ok(Ingested {
        dataset,
        class_names,
        skipped_lines,
    })
}

pub fn ingest_queries(path: &Path, label: Option<&str>) -> Result<Vec<Vec<f64>>, IngestError> {
    read_queries(open(path)?, label)
}

/// Query rows: all columns except `label` (when present) are features. No
/// row is skipped; a missing or unparseable cell is an error.
pub fn read_queries<R: Read>(input: R, label: Option<&str>) -> Result<Vec<Vec<f64>>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_col = label.and_then(|l| header.iter().position(|h| h == l));
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let mut row = Vec::new();
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_col {
                continue;
            }
            if is_missing(cell) {
                return Err(IngestError::MissingValue {
                    line,
                    column: header[j].clone(),
                });
            }
            row.push(parse_cell(cell, line, &header[j])?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IngestError::EmptyAfterFiltering { skipped: 0 });
    }
    Ok(rows)
}
