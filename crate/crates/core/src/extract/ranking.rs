use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExtractError;
use crate::data::TabularDataset;
use crate::learners::{accuracy, Classifier, GbtModel};
use crate::rng::{derive, seeded};

/// Per-feature scores and the feature indices sorted by descending score
/// (lowest index first among equal scores).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

impl FeatureRanking {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        Self { order, scores }
    }

    /// The `count` best features.
    pub fn top(&self, count: usize) -> &[usize] {
        &self.order[..count.min(self.order.len())]
    }
}

/// Accuracy drop on `valid` when one column at a time is shuffled.
///
/// `score(f) = baseline - mean_r accuracy(column f shuffled with repeat r)`.
/// Shuffle `r` of feature `f` uses its own derived seed, so the result does
/// not depend on evaluation order.
pub fn permutation_importance(
    model: &dyn Classifier,
    valid: &TabularDataset,
    n_repeats: usize,
    seed: u64,
) -> Result<FeatureRanking, ExtractError> {
    if valid.n_samples() == 0 {
        return Err(ExtractError::EmptyValidation);
    }
    if n_repeats == 0 {
        return Err(ExtractError::EmptyValidation);
    }
    let baseline = accuracy(model, valid)?;
    let scores = (0..valid.n_features())
        .into_par_iter()
        .map(|f| {
            let original = valid.column(f);
            let mut drop_sum = 0.0;
            for r in 0..n_repeats {
                let mut shuffled = original.clone();
                shuffled.shuffle(&mut seeded(derive(seed, &format!("perm:{f}:{r}"))));
                let acc = accuracy(model, &valid.with_column(f, &shuffled))?;
                drop_sum += baseline - acc;
            }
            Ok(drop_sum / n_repeats as f64)
        })
        .collect::<Result<Vec<f64>, ExtractError>>()?;
    Ok(FeatureRanking::from_scores(scores))
}

/// Total split gain per feature over every tree, normalized to sum to one.
pub fn gain_importance(model: &GbtModel) -> Result<FeatureRanking, ExtractError> {
    let mut scores = vec![0.0; model.n_features];
    let mut any = false;
    for tree in model.trees() {
        for (feature, gain) in tree.splits() {
            scores[feature] += gain;
            any = true;
        }
    }
    let total: f64 = scores.iter().sum();
    if !any || total <= 0.0 {
        return Err(ExtractError::AllLeafModel);
    }
    scores.iter_mut().for_each(|s| *s /= total);
    Ok(FeatureRanking::from_scores(scores))
}
