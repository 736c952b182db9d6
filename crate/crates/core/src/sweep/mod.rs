//! Two-axis hyperparameter grids, their heatmaps, and a classifier for the
//! accuracy pattern a grid shows.

mod pattern;

pub use pattern::{detect_pattern, PatternKind, PatternVerdict};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{train_test_split, SplitSpec, TabularDataset};
use crate::io::write_atomic;
use crate::learners::{
    accuracy, ForestParams, GbtParams, LearnError, MlpArch, ModelSpec, TrainConfig,
};
use crate::report::{heatmap_svg, Palette};
use crate::rng::cell_seed;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("axis `{0}` must be strictly increasing")]
    NotIncreasing(&'static str),
    #[error("axis `{0}` values must be >= 1")]
    ZeroOnAxis(&'static str),
    #[error("unknown learner `{0}` (expected forest, gbt or mlp)")]
    UnknownLearner(String),
    #[error("grid is {rows}x{cols}; pattern detection needs 2 cells along some axis")]
    GridTooSmall { rows: usize, cols: usize },
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Forest,
    Gbt,
    Mlp,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Forest => "forest",
            LearnerKind::Gbt => "gbt",
            LearnerKind::Mlp => "mlp",
        }
    }

    /// `(axis1, axis2)` names.
    pub fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            LearnerKind::Forest | LearnerKind::Gbt => ("max_depth", "n_trees"),
            LearnerKind::Mlp => ("layers", "units"),
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forest" | "rf" => Ok(LearnerKind::Forest),
            "gbt" | "xgb" => Ok(LearnerKind::Gbt),
            "mlp" => Ok(LearnerKind::Mlp),
            _ => Err(SweepError::UnknownLearner(s.to_string())),
        }
    }
}

/// One learner, two hyperparameter axes. `axis1` is tree depth or layer
/// count; `axis2` is tree count or units per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub learner: LearnerKind,
    pub axis1: Vec<usize>,
    pub axis2: Vec<usize>,
    pub train_cfg: TrainConfig,
    pub split: SplitSpec,
    /// Boosting hyperparameters other than depth and rounds.
    pub gbt: GbtParams,
    /// MLP cells with more parameters than this are recorded as failed.
    pub max_params: Option<usize>,
}

impl GridSpec {
    /// Depths (or layers) 1..=6 against 2^1..=2^9 trees (or units).
    pub fn standard(learner: LearnerKind) -> Self {
        Self {
            learner,
            axis1: (1..=6).collect(),
            axis2: (1..=9).map(|p| 1usize << p).collect(),
            train_cfg: TrainConfig::default(),
            split: SplitSpec::default(),
            gbt: GbtParams::default(),
            max_params: None,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        for (name, axis) in [("axis1", &self.axis1), ("axis2", &self.axis2)] {
            if axis.is_empty() {
                return Err(SweepError::EmptyAxis(name));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SweepError::NotIncreasing(name));
            }
            if axis[0] == 0 {
                return Err(SweepError::ZeroOnAxis(name));
            }
        }
        self.train_cfg.validate()?;
        Ok(())
    }

    /// Model for cell (`row` along axis2, `col` along axis1).
    pub fn cell_spec(&self, row: usize, col: usize) -> ModelSpec {
        let seed = cell_seed(self.split.seed, row, col);
        let (a, b) = (self.axis1[col], self.axis2[row]);
        match self.learner {
            LearnerKind::Forest => ModelSpec::Forest(ForestParams::new(b, a, seed)),
            LearnerKind::Gbt => ModelSpec::Gbt(GbtParams {
                n_trees: b,
                max_depth: a,
                seed,
                ..self.gbt
            }),
            LearnerKind::Mlp => ModelSpec::Mlp {
                arch: MlpArch::new(a, b),
                cfg: TrainConfig {
                    seed,
                    ..self.train_cfg
                },
            },
        }
    }
}

/// Test accuracies over a grid; `values[row][col]` with rows along axis2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub dataset: String,
    pub learner: LearnerKind,
    pub axis1: Vec<usize>,
    pub axis2: Vec<usize>,
    /// `None` marks a failed cell.
    pub values: Vec<Vec<Option<f64>>>,
}

impl HeatmapGrid {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn n_failed(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }

    /// Same grid with every accuracy `a` replaced by `f(a)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut().flatten() {
            *v = v.map(&f);
        }
        out
    }

    /// Numeric grid with no failures, mostly for tests and examples.
    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        let rows = values.len();
        let cols = values.first().map_or(0, Vec::len);
        Self {
            dataset: "grid".into(),
            learner: LearnerKind::Forest,
            axis1: (1..=cols).collect(),
            axis2: (1..=rows).collect(),
            values: values
                .into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        }
    }

    /// Header row of axis1 values, then one row per axis2 value; failed
    /// cells are written as `null`.
    pub fn to_csv(&self) -> String {
        let (a1, a2) = self.learner.axis_names();
        let mut out = format!("{a2}\\{a1}");
        for v in &self.axis1 {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        for (r, row) in self.values.iter().enumerate() {
            out.push_str(&self.axis2[r].to_string());
            for v in row {
                match v {
                    Some(a) => out.push_str(&format!(",{a}")),
                    None => out.push_str(",null"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let (a1, a2) = self.learner.axis_names();
        let observed: Vec<f64> = self.values.iter().flatten().filter_map(|v| *v).collect();
        let lo = observed.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = if observed.is_empty() {
            (0.0, 1.0)
        } else {
            (lo, hi)
        };
        heatmap_svg(
            &format!("{} {} ({a2} by {a1})", self.dataset, self.learner.name()),
            &self
                .axis2
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            &self
                .axis1
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            &self.values,
            range,
            Palette::BlueRed,
        )
    }
}

/// Train and score every cell on one seeded split; cells run in parallel.
///
/// Cells that exceed the parameter budget are recorded as failed; any other
/// learner error aborts the sweep.
pub fn run_sweep(ds: &TabularDataset, grid: &GridSpec) -> Result<HeatmapGrid, SweepError> {
    grid.validate()?;
    let (train, test) = train_test_split(ds, grid.split)?;
    let cells: Vec<(usize, usize)> = (0..grid.axis2.len())
        .flat_map(|r| (0..grid.axis1.len()).map(move |c| (r, c)))
        .collect();
    let results: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(r, c)| {
            let spec = grid.cell_spec(r, c);
            match run_cell(&spec, &train, &test, grid.max_params) {
                Ok(acc) => Ok(Some(acc)),
                Err(LearnError::ResourceLimit { .. }) => Ok(None),
                Err(e) => Err(SweepError::Learn(e)),
            }
        })
        .collect::<Result<_, _>>()?;
    let values = results
        .chunks(grid.axis1.len())
        .map(<[Option<f64>]>::to_vec)
        .collect();
    Ok(HeatmapGrid {
        dataset: ds.id.clone(),
        learner: grid.learner,
        axis1: grid.axis1.clone(),
        axis2: grid.axis2.clone(),
        values,
    })
}

fn run_cell(
    spec: &ModelSpec,
    train: &TabularDataset,
    test: &TabularDataset,
    max_params: Option<usize>,
) -> Result<f64, LearnError> {
    if let (ModelSpec::Mlp { arch, .. }, Some(limit)) = (spec, max_params) {
        let params = arch.n_params(train.n_features(), train.n_classes());
        if params > limit {
            return Err(LearnError::ResourceLimit { params, limit });
        }
    }
    let model = spec.fit(train)?;
    accuracy(&model, test)
}

/// Write `grid.csv` and `grid.svg` into `out_dir`.
pub fn emit_heatmap(
    grid: &HeatmapGrid,
    out_dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf), SweepError> {
    let dir = out_dir.as_ref();
    let csv = dir.join("grid.csv");
    let svg = dir.join("grid.svg");
    write_atomic(&csv, grid.to_csv().as_bytes())?;
    write_atomic(&svg, grid.to_svg().as_bytes())?;
    Ok((csv, svg))
}
