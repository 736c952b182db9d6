//! Accuracy-versus-feature-count curves and the increase-rate statistics
//! computed from them.

mod curve;
mod score;

pub use curve::{build_curve, AccuracyCurve, CurveConfig, CurvePoint, Schedule};
pub use score::{
    alpha_score, best_extractors, is_monotone, rho_from_accuracies, rho_per_point, rho_score,
    summary_table, AlphaReport, RhoReport, SummaryRow,
};

use crate::data::DataError;
use crate::extract::ExtractError;

#[derive(Debug, thiserror::Error)]
pub enum CurveError {
    #[error("empty schedule")]
    EmptySchedule,
    #[error("curve has {0} observed points; need at least 2 to score")]
    TooShort(usize),
    #[error("no reports to aggregate")]
    NoReports,
    #[error("feature counts must be strictly increasing (got {prev} then {next})")]
    NotIncreasing { prev: usize, next: usize },
    #[error("feature count {k} exceeds dataset width {d}")]
    CountTooLarge { k: usize, d: usize },
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyOutOfRange(f64),
    #[error("schedule kind does not fit extractor {0}")]
    ScheduleMismatch(&'static str),
    #[error("malformed curve CSV: {0}")]
    Malformed(String),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
