//! Independent reference computations shared by the integration tests and
//! the acceptance binary. Nothing here calls into the code under test except
//! for plain data constructors.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use ndarray::{Array2, ArrayView2};
use perf_oracle::data::TabularDataset;
use perf_oracle::learners::MlpModel;
use perf_oracle::mfpredict::AccuracyMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Count of consecutive pairs `(i - 1, i)` with `acc[i] >= acc[i - 1]`,
/// and the number of such pairs.
pub fn brute_rho(acc: &[f64]) -> (usize, usize) {
    let mut increases = 0;
    let mut pairs = 0;
    for i in 1..acc.len() {
        pairs += 1;
        if !(acc[i] < acc[i - 1]) {
            increases += 1;
        }
    }
    (increases, pairs)
}

/// Regularised structure score of a tree whose leaves hold the given
/// `(g, h)` samples: `-1/2 * sum_j G_j^2 / (H_j + lambda) + gamma * T`.
pub fn structure_score(leaves: &[Vec<(f64, f64)>], lambda: f64, gamma: f64) -> f64 {
    let mut score = 0.0;
    for leaf in leaves {
        let g: f64 = leaf.iter().map(|p| p.0).sum();
        let h: f64 = leaf.iter().map(|p| p.1).sum();
        score -= 0.5 * g * g / (h + lambda);
    }
    score + gamma * leaves.len() as f64
}

/// Central-difference gradient of the mean loss with respect to every flat
/// parameter.
pub fn numeric_gradient(model: &MlpModel, x: ArrayView2<f64>, y: &[usize], h: f64) -> Vec<f64> {
    let base = model.params_flat();
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(base.len());
    let mut params = base.clone();
    for i in 0..base.len() {
        params[i] = base[i] + h;
        probe.set_params_flat(&params).unwrap();
        let up = probe.loss(x, y);
        params[i] = base[i] - h;
        probe.set_params_flat(&params).unwrap();
        let down = probe.loss(x, y);
        params[i] = base[i];
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// Smallest |pre-activation| over every hidden unit and row, from a forward
/// pass written out here. ReLU is not differentiable at 0, so finite
/// differences are only meaningful when this stays clear of the step size.
pub fn hidden_margin(model: &MlpModel, x: ArrayView2<f64>) -> f64 {
    let mut act = x.to_owned();
    let mut margin = f64::INFINITY;
    let hidden = model.layers.len() - 1;
    for layer in &model.layers[..hidden] {
        let z = act.dot(&layer.weights) + &layer.bias;
        margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
        act = z.mapv(|v| v.max(0.0));
    }
    margin
}

/// Average rank by counting: `#{x_j < x_i} + (#{x_j == x_i} + 1) / 2`.
pub fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation of counting ranks, 0 when either column is constant.
pub fn spearman_direct(x: &[f64], y: &[f64]) -> f64 {
    let rx = counting_ranks(x);
    let ry = counting_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Plain Pearson correlation matrix of the columns of `x`.
pub fn pearson_matrix(x: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    Array2::from_shape_fn((d, d), |(a, b)| {
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for i in 0..n {
            let u = x[[i, a]] - means[a];
            let v = x[[i, b]] - means[b];
            sab += u * v;
            saa += u * u;
            sbb += v * v;
        }
        if a == b {
            1.0
        } else {
            sab / (saa * sbb).sqrt()
        }
    })
}

#[derive(Clone, Debug)]
pub enum Cluster {
    Leaf(usize),
    Join(Box<Cluster>, Box<Cluster>),
}

impl Cluster {
    pub fn size(&self) -> usize {
        match self {
            Cluster::Leaf(_) => 1,
            Cluster::Join(a, b) => a.size() + b.size(),
        }
    }
}

/// Squared Ward dissimilarity between two clusters, recomputed from the
/// leaves through the Lance-Williams recurrence on every call.
pub fn ward_sq(a: &Cluster, b: &Cluster, corr: &Array2<f64>) -> f64 {
    match (a, b) {
        (Cluster::Leaf(i), Cluster::Leaf(j)) => {
            let d = (1.0 - corr[[*i, *j]]).max(0.0);
            d * d
        }
        (Cluster::Join(p, q), k) | (k, Cluster::Join(p, q)) => {
            let (np, nq, nk) = (p.size() as f64, q.size() as f64, k.size() as f64);
            ((np + nk) * ward_sq(p, k, corr) + (nq + nk) * ward_sq(q, k, corr)
                - nk * ward_sq(p, q, corr))
                / (np + nq + nk)
        }
    }
}

/// Full agglomeration by exhaustive search over all live pairs at every
/// step. Returns `(id_a, id_b, height)` per merge with scipy-style ids.
pub fn ward_exhaustive(corr: &Array2<f64>) -> Vec<(usize, usize, f64)> {
    let n = corr.nrows();
    let mut live: Vec<(usize, Cluster)> = (0..n).map(|i| (i, Cluster::Leaf(i))).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for p in 0..live.len() {
            for q in (p + 1)..live.len() {
                let d = ward_sq(&live[p].1, &live[q].1, corr);
                let key = (live[p].0.min(live[q].0), live[p].0.max(live[q].0));
                let take = match best {
                    None => true,
                    Some((bd, bk, _, _)) => d < bd || (d == bd && key < bk),
                };
                if take {
                    best = Some((d, key, p, q));
                }
            }
        }
        let (d, key, p, q) = best.unwrap();
        let cq = live.remove(q).1;
        let cp = live.remove(p).1;
        live.push((n + step, Cluster::Join(Box::new(cp), Box::new(cq))));
        out.push((key.0, key.1, d.max(0.0).sqrt()));
    }
    out
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Sample covariance `Xc^T Xc / (n - 1)`.
pub fn covariance(x: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    Array2::from_shape_fn((d, d), |(a, b)| {
        (0..n)
            .map(|i| (x[[i, a]] - means[a]) * (x[[i, b]] - means[b]))
            .sum::<f64>()
            / (n as f64 - 1.0)
    })
}

/// `U V^T` with `U, V` uniform on `[0.1, 0.55]`, so every entry lies in
/// `[0.03, 0.91]` and the matrix has rank `rank`.
pub fn low_rank(m: usize, d: usize, rank: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let u = Array2::from_shape_simple_fn((m, rank), || r.random_range(0.1..0.55));
    let v = Array2::from_shape_simple_fn((d, rank), || r.random_range(0.1..0.55));
    u.dot(&v.t())
}

pub fn dense_matrix(values: Array2<f64>) -> AccuracyMatrix {
    let (m, d) = values.dim();
    AccuracyMatrix::dense(
        (0..m).map(|i| format!("m{i}")).collect(),
        (0..d).map(|j| format!("d{j}")).collect(),
        values,
    )
    .unwrap()
}

pub fn dataset(id: &str, x: Array2<f64>, y: Vec<usize>) -> TabularDataset {
    let n_classes = y.iter().max().map_or(2, |m| (m + 1).max(2));
    let names = (0..x.ncols()).map(|j| format!("f{j}")).collect();
    TabularDataset::new(id, names, x, y, n_classes).unwrap()
}
