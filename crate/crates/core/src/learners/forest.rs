use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{midpoints, TreeNode};
use super::{argmax, Classifier, LearnError};
use crate::data::TabularDataset;
use crate::rng::{seeded, Rng};

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl ForestParams {
    pub fn new(n_trees: usize, max_depth: usize, seed: u64) -> Self {
        Self {
            n_trees,
            max_depth,
            seed,
        }
    }
}

/// Bagged CART classifiers combined by majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode<Vec<f64>>>,
    pub max_depth: usize,
    /// Candidate features drawn at every split.
    pub feature_subsample: usize,
    pub seed: u64,
    pub n_features: usize,
    pub n_classes: usize,
}

impl ForestModel {
    /// Votes per class; each tree votes for the argmax of its leaf
    /// distribution.
    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes];
        for tree in &self.trees {
            votes[argmax(tree.evaluate(row))] += 1;
        }
        votes
    }
}

impl Classifier for ForestModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let votes = self.votes(row);
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}

/// Trains `n_trees` Gini CART trees, each on its own bootstrap sample of
/// size n, with `round(sqrt(d))` candidate features per split.
///
/// Tree `b` draws from a stream seeded with `seed ^ b`, so the forest is
/// identical whether trees are grown serially or in parallel.
pub fn fit_forest(
    train: &TabularDataset,
    params: &ForestParams,
) -> Result<ForestModel, LearnError> {
    if params.n_trees == 0 {
        return Err(LearnError::InvalidConfig("forest needs >= 1 tree".into()));
    }
    if params.max_depth == 0 {
        return Err(LearnError::InvalidConfig("max_depth must be >= 1".into()));
    }
    let d = train.n_features();
    let feature_subsample = ((d as f64).sqrt().round() as usize).clamp(1, d);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded(params.seed ^ b as u64);
            let n = train.n_samples();
            let mut sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let grower = Grower {
                ds: train,
                max_depth: params.max_depth,
                feature_subsample,
            };
            grower.grow(&mut sample, 0, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        max_depth: params.max_depth,
        feature_subsample,
        seed: params.seed,
        n_features: d,
        n_classes: train.n_classes(),
    })
}

struct Grower<'a> {
    ds: &'a TabularDataset,
    max_depth: usize,
    feature_subsample: usize,
}

pub(crate) fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

impl Grower<'_> {
    fn distribution(&self, idx: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.ds.n_classes()];
        for &i in idx {
            counts[self.ds.y()[i]] += 1.0;
        }
        counts
    }

    fn grow(&self, idx: &mut [usize], depth: usize, rng: &mut Rng) -> TreeNode<Vec<f64>> {
        let counts = self.distribution(idx);
        let n = idx.len() as f64;
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if depth >= self.max_depth || pure || idx.len() < 2 {
            return TreeNode::leaf(counts.iter().map(|c| c / n).collect());
        }
        let parent = gini(&counts, n);
        let mut features =
            rand::seq::index::sample(rng, self.ds.n_features(), self.feature_subsample).into_vec();
        features.sort_unstable();

        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = Vec::with_capacity(idx.len());
        for &f in &features {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.ds.row(i)[f], self.ds.y()[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0.0; counts.len()];
            let mut consumed = 0;
            for (pos, threshold) in midpoints(&sorted) {
                for &(_, label) in &sorted[consumed..pos] {
                    left[label] += 1.0;
                }
                consumed = pos;
                let nl = pos as f64;
                let nr = n - nl;
                let right: Vec<f64> = counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let gain = parent - nl / n * gini(&left, nl) - nr / n * gini(&right, nr);
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((f, threshold, gain));
                }
            }
        }
        match best {
            Some((feature, threshold, gain)) if gain > MIN_GAIN => {
                let split = partition(idx, |i| self.ds.row(i)[feature] <= threshold);
                let (l, r) = idx.split_at_mut(split);
                let left = self.grow(l, depth + 1, rng);
                let right = self.grow(r, depth + 1, rng);
                TreeNode::split(feature, threshold, gain, left, right)
            }
            _ => TreeNode::leaf(counts.iter().map(|c| c / n).collect()),
        }
    }
}

/// Stable partition: entries satisfying `pred` first. Returns the boundary.
pub(crate) fn partition(idx: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let (mut yes, no): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| pred(i));
    let boundary = yes.len();
    yes.extend(no);
    idx.copy_from_slice(&yes);
    boundary
}
