//! Tabular dataset ingestion: CSV loading with one-hot encoding, seeded
//! train/test splits, remote fetch with a local cache, and a synthetic
//! classification generator.

mod csv_io;
mod dataset;
mod fetch;
mod synthetic;

use std::path::PathBuf;

pub use csv_io::{load_csv, load_csv_reader, save_csv};
pub use dataset::{split_indices, train_test_split, SplitSpec, TabularDataset};
pub use fetch::{cache_path, fetch_dataset, fetch_dataset_with, HttpTransport, Transport};
pub use synthetic::{make_classification, SyntheticSpec};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("missing label column `{0}`")]
    MissingLabelColumn(String),
    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("single-class: label column has only one distinct value")]
    SingleClass,
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("dataset has no rows")]
    Empty,
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("column {column} out of range for {n_features} features")]
    ColumnOutOfRange { column: usize, n_features: usize },
    #[error("train ratio {0} must lie strictly between 0 and 1")]
    InvalidRatio(f64),
    #[error("degenerate-split: {n} rows give {train} train rows and leave one side empty")]
    DegenerateSplit { n: usize, train: usize },
    #[error("fetch-failed: {0}")]
    FetchFailed(String),
    #[error("checksum mismatch for {url}: cached {expected}, downloaded {found}")]
    ChecksumMismatch {
        url: String,
        expected: String,
        found: String,
    },
    #[error("unsupported url scheme: {0}")]
    UnsupportedUrl(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
