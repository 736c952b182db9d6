use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, softmax_in_place};
use super::forest::partition;
use super::tree::{midpoints, TreeNode};
use super::{argmax, Classifier, LearnError};
use crate::data::TabularDataset;

const PRIOR_FLOOR: f64 = 1e-6;

fn structure_term(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

/// Loss reduction of splitting a leaf with gradient/hessian sums
/// `(g_left + g_right, h_left + h_right)` into the two given children.
pub fn split_gain(
    g_left: f64,
    h_left: f64,
    g_right: f64,
    h_right: f64,
    lambda: f64,
    gamma: f64,
) -> f64 {
    0.5 * (structure_term(g_left, h_left, lambda) + structure_term(g_right, h_right, lambda)
        - structure_term(g_left + g_right, h_left + h_right, lambda))
        - gamma
}

/// Optimal weight of a leaf: `-G / (H + lambda)`.
pub(crate) fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        -g / denom
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Recorded with the model; exact greedy growth itself draws no random
    /// numbers.
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 6,
            eta: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            seed: 0,
        }
    }
}

/// Additive tree ensemble on the logit (binary) or softmax (multiclass)
/// scale. `rounds[k]` holds one tree for two classes, one per class
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: Vec<f64>,
    pub rounds: Vec<Vec<TreeNode<f64>>>,
    pub eta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub max_depth: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

impl GbtModel {
    /// `base + eta * sum of tree outputs`, per output column.
    pub fn margins(&self, row: &[f64]) -> Vec<f64> {
        let mut out = self.base_score.clone();
        for round in &self.rounds {
            for (m, tree) in out.iter_mut().zip(round) {
                *m += self.eta * *tree.evaluate(row);
            }
        }
        out
    }

    pub fn trees(&self) -> impl Iterator<Item = &TreeNode<f64>> {
        self.rounds.iter().flatten()
    }
}

impl Classifier for GbtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let m = self.margins(row);
        if self.n_classes == 2 {
            usize::from(m[0] > 0.0)
        } else {
            argmax(&m)
        }
    }
}

fn base_scores(train: &TabularDataset) -> Vec<f64> {
    let n = train.n_samples() as f64;
    let prior: Vec<f64> = train
        .class_counts()
        .iter()
        .map(|&c| (c as f64 / n).clamp(PRIOR_FLOOR, 1.0 - PRIOR_FLOOR))
        .collect();
    if train.n_classes() == 2 {
        vec![(prior[1] / (1.0 - prior[1])).ln()]
    } else {
        prior.iter().map(|p| p.ln()).collect()
    }
}

/// Gradient boosting with second-order split search.
///
/// Each round computes `g = p - y` and `h = p(1 - p)` of the cross-entropy at
/// the current margins, grows one tree per output by exact greedy search over
/// [`split_gain`], and gives every leaf the weight `-G / (H + lambda)`.
pub fn fit_gbt(train: &TabularDataset, params: &GbtParams) -> Result<GbtModel, LearnError> {
    if params.n_trees == 0 {
        return Err(LearnError::InvalidConfig(
            "boosting needs >= 1 round".into(),
        ));
    }
    if params.max_depth == 0 {
        return Err(LearnError::InvalidConfig("max_depth must be >= 1".into()));
    }
    if params.lambda < 0.0 || params.gamma < 0.0 || params.eta < 0.0 {
        return Err(LearnError::InvalidConfig(
            "eta, lambda and gamma must be non-negative".into(),
        ));
    }
    let n = train.n_samples();
    let c = train.n_classes();
    let outputs = if c == 2 { 1 } else { c };
    let base_score = base_scores(train);
    let mut margins: Vec<Vec<f64>> = vec![base_score.clone(); n];
    let mut rounds = Vec::with_capacity(params.n_trees);

    let mut grad = vec![vec![0.0; n]; outputs];
    let mut hess = vec![vec![0.0; n]; outputs];
    for _ in 0..params.n_trees {
        for (i, m) in margins.iter().enumerate() {
            let label = train.y()[i];
            if c == 2 {
                let p = sigmoid(m[0]);
                grad[0][i] = p - label as f64;
                hess[0][i] = p * (1.0 - p);
            } else {
                let mut p = m.clone();
                softmax_in_place(&mut p);
                for k in 0..c {
                    let target = if k == label { 1.0 } else { 0.0 };
                    grad[k][i] = p[k] - target;
                    hess[k][i] = p[k] * (1.0 - p[k]);
                }
            }
        }
        let trees: Vec<TreeNode<f64>> = (0..outputs)
            .map(|k| {
                let grower = BoostGrower {
                    ds: train,
                    grad: &grad[k],
                    hess: &hess[k],
                    params,
                };
                let mut idx: Vec<usize> = (0..n).collect();
                grower.grow(&mut idx, 0)
            })
            .collect();
        for (i, m) in margins.iter_mut().enumerate() {
            let row = train.row(i);
            for (mk, tree) in m.iter_mut().zip(&trees) {
                *mk += params.eta * *tree.evaluate(row);
            }
        }
        rounds.push(trees);
    }
    Ok(GbtModel {
        base_score,
        rounds,
        eta: params.eta,
        lambda: params.lambda,
        gamma: params.gamma,
        max_depth: params.max_depth,
        n_features: train.n_features(),
        n_classes: c,
    })
}

struct BoostGrower<'a> {
    ds: &'a TabularDataset,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbtParams,
}

impl BoostGrower<'_> {
    fn grow(&self, idx: &mut [usize], depth: usize) -> TreeNode<f64> {
        let g_total: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h_total: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        let leaf = || TreeNode::leaf(leaf_weight(g_total, h_total, self.params.lambda));
        if depth >= self.params.max_depth || idx.len() < 2 {
            return leaf();
        }
        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = Vec::with_capacity(idx.len());
        for f in 0..self.ds.n_features() {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.ds.row(i)[f], i)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (mut gl, mut hl) = (0.0, 0.0);
            let mut consumed = 0;
            for (pos, threshold) in midpoints(&sorted) {
                for &(_, i) in &sorted[consumed..pos] {
                    gl += self.grad[i];
                    hl += self.hess[i];
                }
                consumed = pos;
                let gain = split_gain(
                    gl,
                    hl,
                    g_total - gl,
                    h_total - hl,
                    self.params.lambda,
                    self.params.gamma,
                );
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((f, threshold, gain));
                }
            }
        }
        match best {
            Some((feature, threshold, gain)) if gain > 0.0 => {
                let split = partition(idx, |i| self.ds.row(i)[feature] <= threshold);
                let (l, r) = idx.split_at_mut(split);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                TreeNode::split(feature, threshold, gain, left, right)
            }
            _ => leaf(),
        }
    }
}
