use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::ExtractError;

/// Symmetric feature-by-feature correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub values: Array2<f64>,
}

impl CorrelationMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self, ExtractError> {
        if values.nrows() != values.ncols() {
            return Err(ExtractError::NotSquare(values.nrows(), values.ncols()));
        }
        Ok(Self { values })
    }

    pub fn n_features(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }
}

/// 1-based ranks, ties receiving the mean of the positions they span.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn centered(ranks: Vec<f64>) -> (Vec<f64>, f64) {
    let n = ranks.len() as f64;
    let mean = ranks.iter().sum::<f64>() / n;
    let dev: Vec<f64> = ranks.into_iter().map(|r| r - mean).collect();
    let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
    (dev, norm)
}

/// Pearson correlation of column mid-ranks. A constant column correlates
/// 0 with every other column.
pub fn spearman_matrix(x: ArrayView2<f64>) -> Result<CorrelationMatrix, ExtractError> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(ExtractError::TooFewRows(n));
    }
    if d < 2 {
        return Err(ExtractError::TooFewFeatures {
            needed: 2,
            found: d,
        });
    }
    let cols: Vec<(Vec<f64>, f64)> = (0..d)
        .map(|j| centered(mid_ranks(&x.column(j).to_vec())))
        .collect();
    let mut out = Array2::<f64>::eye(d);
    for i in 0..d {
        for j in (i + 1)..d {
            let (a, na) = &cols[i];
            let (b, nb) = &cols[j];
            let r = if *na == 0.0 || *nb == 0.0 {
                0.0
            } else {
                let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
                (dot / (na * nb)).clamp(-1.0, 1.0)
            };
            out[[i, j]] = r;
            out[[j, i]] = r;
        }
    }
    CorrelationMatrix::new(out)
}
