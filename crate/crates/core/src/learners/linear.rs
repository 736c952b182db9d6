use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::activation::sigmoid;
use super::optim::Adam;
use super::{Classifier, LearnError, TrainConfig};
use crate::data::TabularDataset;
use crate::rng::seeded;

/// `y = beta + w · x`, thresholded at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub beta: f64,
    pub n_classes: usize,
}

impl LinearModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.beta + self.w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}

impl Classifier for LinearModel {
    fn n_features(&self) -> usize {
        self.w.len()
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        usize::from(self.score(row) >= 0.0)
    }
}

/// Fits `(w, beta)` by mini-batch Adam on the logistic loss.
pub fn fit_linear(train: &TabularDataset, cfg: &TrainConfig) -> Result<LinearModel, LearnError> {
    cfg.validate()?;
    if train.n_classes() != 2 {
        return Err(LearnError::BinaryOnly(train.n_classes()));
    }
    let n = train.n_samples();
    let d = train.n_features();
    // Layout: weights then bias.
    let mut params = vec![0.0; d + 1];
    let mut adam = Adam::new(d + 1, cfg);
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; d + 1];

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let row = train.row(i);
                let z = params[d] + params[..d].iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
                let err = (sigmoid(z) - train.y()[i] as f64) * scale;
                for (g, x) in grad[..d].iter_mut().zip(row) {
                    *g += err * x;
                }
                grad[d] += err;
            }
            adam.update(&mut params, &grad);
        }
    }
    let beta = params.pop().expect("bias slot");
    Ok(LinearModel {
        w: params,
        beta,
        n_classes: 2,
    })
}
