use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AccuracyMatrix, MfError};
use crate::rng::{derive, seeded};

const INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlsParams {
    /// Latent dimension; `None` means `min(rows, cols)`.
    pub k: Option<usize>,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for AlsParams {
    fn default() -> Self {
        Self {
            k: None,
            lambda: 0.5,
            epochs: 1000,
            seed: 0,
        }
    }
}

/// `r(i, j) ~ mu + row_bias[i] + col_bias[j] + <w[i], h[j]>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub k: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mu: f64,
    pub row_bias: Vec<f64>,
    pub col_bias: Vec<f64>,
    /// `rows x k`.
    pub w: Array2<f64>,
    /// `cols x k`.
    pub h: Array2<f64>,
    /// Objective before the first epoch, then after each epoch.
    pub objective: Vec<f64>,
}

impl Factorization {
    /// Unclamped score.
    pub fn raw_score(&self, i: usize, j: usize) -> f64 {
        let dot: f64 = self.w.row(i).dot(&self.h.row(j));
        self.mu + self.row_bias[i] + self.col_bias[j] + dot
    }

    pub fn to_json(&self) -> Result<String, MfError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, MfError> {
        let f: Factorization = serde_json::from_str(text)?;
        let (m, d) = (f.row_labels.len(), f.col_labels.len());
        if f.w.dim() != (m, f.k)
            || f.h.dim() != (d, f.k)
            || f.row_bias.len() != m
            || f.col_bias.len() != d
        {
            return Err(MfError::Shape("factor shapes disagree with labels".into()));
        }
        Ok(f)
    }
}

/// Prediction clamped to `[0, 1]`.
pub fn predict_entry(f: &Factorization, i: usize, j: usize) -> Result<f64, MfError> {
    let (m, d) = (f.row_labels.len(), f.col_labels.len());
    if i >= m || j >= d {
        return Err(MfError::IndexOutOfRange {
            i,
            j,
            rows: m,
            cols: d,
        });
    }
    Ok(f.raw_score(i, j).clamp(0.0, 1.0))
}

struct Observed {
    /// Per row: `(col, value)`.
    by_row: Vec<Vec<(usize, f64)>>,
    /// Per column: `(row, value)`.
    by_col: Vec<Vec<(usize, f64)>>,
    count: usize,
}

impl Observed {
    fn new(m: &AccuracyMatrix) -> Self {
        let mut by_row = vec![Vec::new(); m.n_rows()];
        let mut by_col = vec![Vec::new(); m.n_cols()];
        let mut count = 0;
        for (i, j, v) in m.entries() {
            by_row[i].push((j, v));
            by_col[j].push((i, v));
            count += 1;
        }
        Self {
            by_row,
            by_col,
            count,
        }
    }
}

struct State {
    mu: f64,
    b: Vec<f64>,
    c: Vec<f64>,
    w: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl State {
    fn residual(&self, i: usize, j: usize, r: f64) -> f64 {
        r - self.mu - self.b[i] - self.c[j] - dot(&self.w[i], &self.h[j])
    }

    fn objective(&self, obs: &Observed, lambda: f64) -> f64 {
        let sq: f64 = obs
            .by_row
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, r)| (i, j, r)))
            .map(|(i, j, r)| self.residual(i, j, r).powi(2))
            .sum();
        let norm = |v: &[Vec<f64>]| v.iter().flatten().map(|x| x * x).sum::<f64>();
        let bias = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        sq + lambda * (norm(&self.w) + norm(&self.h) + bias(&self.b) + bias(&self.c))
    }
}

/// Ridge solution of `sum (target - <x, f>)^2 + lambda |x|^2` over `rows` of
/// `(factor, target)`.
fn ridge(k: usize, lambda: f64, rows: impl Iterator<Item = (Vec<f64>, f64)>) -> Vec<f64> {
    let mut a = DMatrix::<f64>::identity(k, k) * lambda;
    let mut rhs = DVector::<f64>::zeros(k);
    let mut any = false;
    for (f, t) in rows {
        any = true;
        for p in 0..k {
            rhs[p] += f[p] * t;
            for q in 0..k {
                a[(p, q)] += f[p] * f[q];
            }
        }
    }
    if !any {
        return vec![0.0; k];
    }
    let solved = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(k)),
    };
    solved.iter().copied().collect()
}

fn init_factor(seed: u64, label: &str, k: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let mut rng = seeded(derive(seed, label));
    (0..k).map(|_| normal.sample(&mut rng)).collect()
}

/// Biased matrix factorization by alternating exact block minimization.
///
/// Every epoch refreshes the global mean, then row biases, column biases,
/// row factors and column factors, each to its exact minimizer with the other
/// blocks fixed; unobserved rows or columns keep zero factors and biases.
/// Row `i` draws its initial factor from a seed derived from its label, so
/// reordering rows reorders the result.
pub fn als_fit(matrix: &AccuracyMatrix, params: &AlsParams) -> Result<Factorization, MfError> {
    let (m, d) = (matrix.n_rows(), matrix.n_cols());
    let max_k = m.min(d);
    let k = params.k.unwrap_or(max_k);
    if k == 0 || k > max_k {
        return Err(MfError::RankOutOfRange { k, max: max_k });
    }
    if !(params.lambda >= 0.0) {
        return Err(MfError::InvalidParam(format!("lambda = {}", params.lambda)));
    }
    let obs = Observed::new(matrix);
    if obs.count == 0 {
        return Err(MfError::EmptyMask);
    }
    let lambda = params.lambda;
    let mut s = State {
        mu: 0.0,
        b: vec![0.0; m],
        c: vec![0.0; d],
        w: matrix
            .row_labels
            .iter()
            .map(|l| init_factor(params.seed, &format!("row:{l}"), k))
            .collect(),
        h: matrix
            .col_labels
            .iter()
            .map(|l| init_factor(params.seed, &format!("col:{l}"), k))
            .collect(),
    };
    let mut objective = Vec::with_capacity(params.epochs + 1);
    objective.push(s.objective(&obs, lambda));

    for _ in 0..params.epochs {
        let total: f64 = obs
            .by_row
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, r)| (i, j, r)))
            .map(|(i, j, r)| s.residual(i, j, r) + s.mu)
            .sum();
        s.mu = total / obs.count as f64;

        let b: Vec<f64> = (0..m)
            .map(|i| {
                let row = &obs.by_row[i];
                let sum: f64 = row.iter().map(|&(j, r)| s.residual(i, j, r) + s.b[i]).sum();
                sum / (row.len() as f64 + lambda).max(f64::MIN_POSITIVE)
            })
            .collect();
        s.b = b;
        let c: Vec<f64> = (0..d)
            .map(|j| {
                let col = &obs.by_col[j];
                let sum: f64 = col.iter().map(|&(i, r)| s.residual(i, j, r) + s.c[j]).sum();
                sum / (col.len() as f64 + lambda).max(f64::MIN_POSITIVE)
            })
            .collect();
        s.c = c;

        let w: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                ridge(
                    k,
                    lambda,
                    obs.by_row[i]
                        .iter()
                        .map(|&(j, r)| (s.h[j].clone(), r - s.mu - s.b[i] - s.c[j])),
                )
            })
            .collect();
        s.w = w;
        let h: Vec<Vec<f64>> = (0..d)
            .into_par_iter()
            .map(|j| {
                ridge(
                    k,
                    lambda,
                    obs.by_col[j]
                        .iter()
                        .map(|&(i, r)| (s.w[i].clone(), r - s.mu - s.b[i] - s.c[j])),
                )
            })
            .collect();
        s.h = h;
        objective.push(s.objective(&obs, lambda));
    }

    let to_array = |rows: &[Vec<f64>]| Array2::from_shape_fn((rows.len(), k), |(i, p)| rows[i][p]);
    Ok(Factorization {
        row_labels: matrix.row_labels.clone(),
        col_labels: matrix.col_labels.clone(),
        k,
        lambda,
        epochs: params.epochs,
        seed: params.seed,
        mu: s.mu,
        row_bias: s.b,
        col_bias: s.c,
        w: to_array(&s.w),
        h: to_array(&s.h),
        objective,
    })
}
