use serde::{Deserialize, Serialize};

use super::{HeatmapGrid, SweepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Accuracy grows along both axes.
    Expected,
    /// Accuracy shrinks along both axes.
    Unexpected,
    #[serde(rename = "none")]
    NoPattern,
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PatternKind::Expected => "expected",
            PatternKind::Unexpected => "unexpected",
            PatternKind::NoPattern => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternVerdict {
    pub kind: PatternKind,
    /// Mean share of non-decreasing neighbour pairs, moving along axis1.
    pub axis1_fraction: f64,
    pub axis2_fraction: f64,
    /// Mean share of non-increasing neighbour pairs.
    pub axis1_reversed: f64,
    pub axis2_reversed: f64,
    pub tau: f64,
}

/// `(up, down)` fractions averaged over lanes; a lane touching a failed cell
/// is skipped, and no usable lanes at all counts as 1.
fn lane_fractions(lanes: impl Iterator<Item = Vec<Option<f64>>>) -> (f64, f64) {
    let (mut up_sum, mut down_sum, mut count) = (0.0, 0.0, 0usize);
    for lane in lanes {
        let Some(vals) = lane.into_iter().collect::<Option<Vec<f64>>>() else {
            continue;
        };
        if vals.len() < 2 {
            continue;
        }
        let pairs = (vals.len() - 1) as f64;
        let up = vals.windows(2).filter(|w| w[1] >= w[0]).count() as f64;
        let down = vals.windows(2).filter(|w| w[1] <= w[0]).count() as f64;
        up_sum += up / pairs;
        down_sum += down / pairs;
        count += 1;
    }
    if count == 0 {
        (1.0, 1.0)
    } else {
        (up_sum / count as f64, down_sum / count as f64)
    }
}

/// Classify a grid: `expected` when both non-decreasing fractions reach
/// `tau`, otherwise `unexpected` when both non-increasing fractions do.
pub fn detect_pattern(grid: &HeatmapGrid, tau: f64) -> Result<PatternVerdict, SweepError> {
    let (rows, cols) = (grid.n_rows(), grid.n_cols());
    if rows < 2 && cols < 2 {
        return Err(SweepError::GridTooSmall { rows, cols });
    }
    let (axis1_fraction, axis1_reversed) = lane_fractions(grid.values.iter().cloned());
    let (axis2_fraction, axis2_reversed) =
        lane_fractions((0..cols).map(|c| grid.values.iter().map(|row| row[c]).collect()));
    let kind = if axis1_fraction >= tau && axis2_fraction >= tau {
        PatternKind::Expected
    } else if axis1_reversed >= tau && axis2_reversed >= tau {
        PatternKind::Unexpected
    } else {
        PatternKind::NoPattern
    };
    Ok(PatternVerdict {
        kind,
        axis1_fraction,
        axis2_fraction,
        axis1_reversed,
        axis2_reversed,
        tau,
    })
}
