use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::ExtractError;

/// Fitted principal-component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// `k x d`, orthonormal rows, by descending singular value.
    pub components: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub n_samples: usize,
}

impl Projection {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }

    /// Variance captured by each component: `sigma^2 / (n - 1)`.
    pub fn explained_variance(&self) -> Vec<f64> {
        let denom = self.n_samples.saturating_sub(1).max(1) as f64;
        self.singular_values.iter().map(|s| s * s / denom).collect()
    }
}

/// Top-`k` principal axes of `x` via SVD of the column-centered matrix.
///
/// Component signs are fixed so the largest-magnitude loading of each axis is
/// positive.
pub fn pca_fit(x: ArrayView2<f64>, k: usize) -> Result<Projection, ExtractError> {
    let (n, d) = x.dim();
    let max = n.min(d);
    if k == 0 || k > max {
        return Err(ExtractError::ComponentsOutOfRange { k, max });
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let centered = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut components = Array2::zeros((k, d));
    let mut singular_values = Vec::with_capacity(k);
    for (row, &src) in order.iter().take(k).enumerate() {
        let axis: Vec<f64> = (0..d).map(|j| v_t[(src, j)]).collect();
        let pivot = axis
            .iter()
            .copied()
            .reduce(|best, v| if v.abs() > best.abs() { v } else { best })
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in axis.into_iter().enumerate() {
            components[[row, j]] = sign * v;
        }
        singular_values.push(svd.singular_values[src]);
    }
    Ok(Projection {
        mean,
        components,
        singular_values,
        n_samples: n,
    })
}

/// `(x - mean) * components^T`: one column per component.
pub fn pca_transform(proj: &Projection, x: ArrayView2<f64>) -> Result<Array2<f64>, ExtractError> {
    if x.ncols() != proj.n_features() {
        return Err(ExtractError::ArityMismatch {
            expected: proj.n_features(),
            found: x.ncols(),
        });
    }
    let mean = ndarray::ArrayView1::from(&proj.mean);
    let centered = &x - &mean;
    Ok(centered.dot(&proj.components.t()))
}
