use std::collections::HashSet;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::rng::seeded;

/// A numeric classification dataset with labels in `0..n_classes`.
///
/// The feature matrix is always stored in standard (row-major) layout so that
/// [`TabularDataset::row`] can hand out contiguous slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    pub id: String,
    feature_names: Vec<String>,
    x: Array2<f64>,
    y: Vec<usize>,
    n_classes: usize,
}

impl TabularDataset {
    /// Builds a dataset, checking every invariant.
    ///
    /// `n_classes` must be at least 2 and strictly greater than every label. A
    /// subset of a larger dataset may legitimately miss some classes, so labels
    /// are not required to cover the whole range.
    pub fn new(
        id: impl Into<String>,
        feature_names: Vec<String>,
        x: Array2<f64>,
        y: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, DataError> {
        let (n, d) = x.dim();
        if n == 0 {
            return Err(DataError::Empty);
        }
        if d == 0 {
            return Err(DataError::NoFeatures);
        }
        if y.len() != n {
            return Err(DataError::Shape {
                expected: n,
                found: y.len(),
            });
        }
        if feature_names.len() != d {
            return Err(DataError::Shape {
                expected: d,
                found: feature_names.len(),
            });
        }
        let mut seen = HashSet::with_capacity(d);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateFeature(name.clone()));
            }
        }
        if n_classes < 2 {
            return Err(DataError::SingleClass);
        }
        if let Some(&bad) = y.iter().find(|&&label| label >= n_classes) {
            return Err(DataError::LabelOutOfRange {
                label: bad,
                n_classes,
            });
        }
        if let Some(((row, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(DataError::NonFinite { row, col });
        }
        let x = x.as_standard_layout().into_owned();
        Ok(Self {
            id: id.into(),
            feature_names,
            x,
            y,
            n_classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        let flat = self.x.as_slice().expect("standard layout");
        &flat[i * d..(i + 1) * d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.column(j).to_vec()
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &label in &self.y {
            counts[label] += 1;
        }
        counts
    }

    /// Subset of rows, keeping the class count of the parent.
    pub fn select_rows(&self, rows: &[usize], id: impl Into<String>) -> Result<Self, DataError> {
        let x = self.x.select(Axis(0), rows);
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Self::new(id, self.feature_names.clone(), x, y, self.n_classes)
    }

    /// Subset of columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, DataError> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(DataError::ColumnOutOfRange {
                column: bad,
                n_features: self.n_features(),
            });
        }
        let x = self.x.select(Axis(1), cols);
        let names = cols
            .iter()
            .map(|&c| self.feature_names[c].clone())
            .collect();
        Self::new(self.id.clone(), names, x, self.y.clone(), self.n_classes)
    }

    /// Same labels with a replaced feature matrix (used by projections).
    pub fn with_features(
        &self,
        feature_names: Vec<String>,
        x: Array2<f64>,
    ) -> Result<Self, DataError> {
        Self::new(
            self.id.clone(),
            feature_names,
            x,
            self.y.clone(),
            self.n_classes,
        )
    }

    /// Copy with column `col` replaced; used by permutation importance.
    pub(crate) fn with_column(&self, col: usize, values: &[f64]) -> Self {
        let mut out = self.clone();
        out.x
            .column_mut(col)
            .assign(&ndarray::ArrayView1::from(values));
        out
    }
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_ratio: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_ratio: f64, seed: u64) -> Result<Self, DataError> {
        if !(train_ratio > 0.0 && train_ratio < 1.0) {
            return Err(DataError::InvalidRatio(train_ratio));
        }
        Ok(Self { train_ratio, seed })
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_ratio: 0.33,
            seed: 0,
        }
    }
}

/// Row indices of a seeded split: `(train, test)`.
///
/// The train side gets `round(ratio * n)` rows, rounding halves up.
pub fn split_indices(n: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(spec.train_ratio > 0.0 && spec.train_ratio < 1.0) {
        return Err(DataError::InvalidRatio(spec.train_ratio));
    }
    let n_train = (spec.train_ratio * n as f64 + 0.5).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(DataError::DegenerateSplit {
            n,
            train: n_train.min(n),
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(spec.seed));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn train_test_split(
    ds: &TabularDataset,
    spec: SplitSpec,
) -> Result<(TabularDataset, TabularDataset), DataError> {
    let (train, test) = split_indices(ds.n_samples(), spec)?;
    Ok((
        ds.select_rows(&train, format!("{}/train", ds.id))?,
        ds.select_rows(&test, format!("{}/test", ds.id))?,
    ))
}
