//! From-scratch classifiers behind one train/predict/accuracy contract:
//! a thresholded linear model, a ReLU multilayer perceptron trained with
//! Adam, a bagged CART forest, and second-order gradient-boosted trees.

mod activation;
mod forest;
mod gbt;
mod linear;
mod mlp;
mod optim;
mod serialize;
mod spec;
mod tree;

use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;

pub use activation::{relu, relu_grad, sigmoid, softmax};
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use gbt::{fit_gbt, split_gain, GbtModel, GbtParams};
pub use linear::{fit_linear, LinearModel};
pub use mlp::{fit_mlp, LayerGrad, MlpArch, MlpLayer, MlpModel};
pub use serialize::{FlatNode, ModelDocument, MODEL_FORMAT_VERSION};
pub use spec::{Model, ModelSpec};
pub use tree::TreeNode;

pub(crate) use activation::argmax;

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("binary-only: model supports 2 classes, dataset has {0}")]
    BinaryOnly(usize),
    #[error("arity mismatch: model expects {expected} features, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("resource limit: {params} parameters exceed the budget of {limit}")]
    ResourceLimit { params: usize, limit: usize },
    #[error("unsupported model document version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Anything that maps a feature row to a class index.
pub trait Classifier: Send + Sync {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;
    /// Caller guarantees `row.len() == self.n_features()`.
    fn predict_row(&self, row: &[f64]) -> usize;
}

/// Optimizer and schedule settings shared by the gradient-trained models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epochs: 150,
            learning_rate: 1e-3,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.epochs == 0 {
            return Err(LearnError::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(LearnError::InvalidConfig(
                "learning_rate must be > 0".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(LearnError::InvalidConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn predict(model: &dyn Classifier, row: &[f64]) -> Result<usize, LearnError> {
    if row.len() != model.n_features() {
        return Err(LearnError::ArityMismatch {
            expected: model.n_features(),
            found: row.len(),
        });
    }
    Ok(model.predict_row(row))
}

/// Fraction of rows of `ds` the model labels correctly.
pub fn accuracy(model: &dyn Classifier, ds: &TabularDataset) -> Result<f64, LearnError> {
    if ds.n_features() != model.n_features() {
        return Err(LearnError::ArityMismatch {
            expected: model.n_features(),
            found: ds.n_features(),
        });
    }
    let correct = (0..ds.n_samples())
        .filter(|&i| model.predict_row(ds.row(i)) == ds.y()[i])
        .count();
    Ok(correct as f64 / ds.n_samples() as f64)
}
