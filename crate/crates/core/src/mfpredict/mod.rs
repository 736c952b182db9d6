//! Completion of a partially observed model-by-dataset accuracy matrix with
//! biased alternating least squares, plus holdout scoring and latent-space
//! geometry.

mod als;
mod eval;
mod geometry;
mod matrix;

pub use als::{als_fit, predict_entry, AlsParams, Factorization};
pub use eval::{holdout_eval, mask_entries, test_count, EvalParams, EvalReport, EvalRow};
pub use geometry::{coordinates, distance_matrix, DistanceMatrix, MatrixAxis};
pub use matrix::{load_matrix, AccuracyMatrix};

#[derive(Debug, thiserror::Error)]
pub enum MfError {
    #[error("out-of-range accuracy {value} at ({row}, {col})")]
    OutOfRange {
        row: String,
        col: String,
        value: f64,
    },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("bad number `{text}` at ({row}, {col})")]
    BadNumber {
        row: String,
        col: String,
        text: String,
    },
    #[error("matrix shape: {0}")]
    Shape(String),
    #[error("no observed entries")]
    EmptyMask,
    #[error("k = {k} out of range 1..={max}")]
    RankOutOfRange { k: usize, max: usize },
    #[error("index ({i}, {j}) outside {rows}x{cols} matrix")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("empty-test: ratio {0} masks no entries")]
    EmptyTest(f64),
    #[error("ratio {0} leaves nothing to train on")]
    NothingToTrain(f64),
    #[error("unknown-label: `{0}`")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("cannot open {0}: {1}")]
    Open(String, #[source] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
