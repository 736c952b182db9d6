use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::MfError;
use crate::io::write_atomic;

/// Partially observed table of accuracies. Blank CSV cells are unobserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    /// Text of the top-left header cell.
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Array2<f64>,
    pub observed: Array2<bool>,
}

fn check_unique(labels: &[String]) -> Result<(), MfError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(MfError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl AccuracyMatrix {
    pub fn new(
        corner: impl Into<String>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Array2<f64>,
        observed: Array2<bool>,
    ) -> Result<Self, MfError> {
        let shape = (row_labels.len(), col_labels.len());
        if values.dim() != shape || observed.dim() != shape {
            return Err(MfError::Shape(format!(
                "labels imply {shape:?}, values {:?}, mask {:?}",
                values.dim(),
                observed.dim()
            )));
        }
        check_unique(&row_labels)?;
        check_unique(&col_labels)?;
        for ((i, j), &v) in values.indexed_iter() {
            if observed[[i, j]] && !(0.0..=1.0).contains(&v) {
                return Err(MfError::OutOfRange {
                    row: row_labels[i].clone(),
                    col: col_labels[j].clone(),
                    value: v,
                });
            }
        }
        let mut values = values;
        values.zip_mut_with(&observed, |v, &o| {
            if !o {
                *v = 0.0;
            }
        });
        Ok(Self {
            corner: corner.into(),
            row_labels,
            col_labels,
            values,
            observed,
        })
    }

    /// Fully observed matrix.
    pub fn dense(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Array2<f64>,
    ) -> Result<Self, MfError> {
        let observed = Array2::from_elem(values.dim(), true);
        Self::new("", row_labels, col_labels, values, observed)
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.observed[[i, j]].then(|| self.values[[i, j]])
    }

    /// Observed `(row, col, value)` triples in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.values
            .indexed_iter()
            .filter(|(ij, _)| self.observed[*ij])
            .map(|((i, j), &v)| (i, j, v))
            .collect()
    }

    pub fn row_index(&self, label: &str) -> Result<usize, MfError> {
        self.row_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MfError::UnknownLabel(label.to_string()))
    }

    pub fn col_index(&self, label: &str) -> Result<usize, MfError> {
        self.col_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MfError::UnknownLabel(label.to_string()))
    }

    pub fn transpose(&self) -> Self {
        Self {
            corner: self.corner.clone(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            values: self.values.t().to_owned(),
            observed: self.observed.t().to_owned(),
        }
    }

    /// Same matrix with the given cells hidden.
    pub fn masked(&self, hide: &[(usize, usize)]) -> Self {
        let mut out = self.clone();
        for &(i, j) in hide {
            out.observed[[i, j]] = false;
            out.values[[i, j]] = 0.0;
        }
        out
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self, MfError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = r.records();
        let header = records
            .next()
            .ok_or(MfError::Shape("empty matrix file".into()))??;
        let mut header = header.iter().map(|s| s.trim().to_string());
        let corner = header.next().unwrap_or_default();
        let col_labels: Vec<String> = header.collect();
        let d = col_labels.len();
        let mut row_labels = Vec::new();
        let mut values = Vec::new();
        let mut observed = Vec::new();
        for (line, rec) in records.enumerate() {
            let rec = rec?;
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if rec.len() != d + 1 {
                return Err(MfError::Shape(format!(
                    "line {}: expected {} fields, found {}",
                    line + 2,
                    d + 1,
                    rec.len()
                )));
            }
            let label = rec[0].trim().to_string();
            for (j, field) in rec.iter().skip(1).enumerate() {
                let field = field.trim();
                if field.is_empty() {
                    values.push(0.0);
                    observed.push(false);
                } else {
                    let v: f64 = field.parse().map_err(|_| MfError::BadNumber {
                        row: label.clone(),
                        col: col_labels[j].clone(),
                        text: field.to_string(),
                    })?;
                    values.push(v);
                    observed.push(true);
                }
            }
            row_labels.push(label);
        }
        let m = row_labels.len();
        let values = Array2::from_shape_vec((m, d), values).expect("rows checked");
        let observed = Array2::from_shape_vec((m, d), observed).expect("rows checked");
        Self::new(corner, row_labels, col_labels, values, observed)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.corner.clone()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(
                (0..self.n_cols())
                    .map(|j| self.get(i, j).map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MfError> {
        Ok(write_atomic(path.as_ref(), self.to_csv().as_bytes())?)
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<AccuracyMatrix, MfError> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| MfError::Open(path.display().to_string(), e))?;
    AccuracyMatrix::from_reader(file)
}
