use serde::{Deserialize, Serialize};

use super::{
    fit_forest, fit_gbt, fit_linear, fit_mlp, Classifier, ForestModel, ForestParams, GbtModel,
    GbtParams, LearnError, LinearModel, MlpArch, MlpModel, TrainConfig,
};
use crate::data::TabularDataset;

/// Any trained learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
    Forest(ForestModel),
    Gbt(GbtModel),
}

impl Model {
    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Linear(m) => m,
            Model::Mlp(m) => m,
            Model::Forest(m) => m,
            Model::Gbt(m) => m,
        }
    }
}

impl Classifier for Model {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        self.inner().predict_row(row)
    }
}

/// Untrained learner plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear { cfg: TrainConfig },
    Mlp { arch: MlpArch, cfg: TrainConfig },
    Forest(ForestParams),
    Gbt(GbtParams),
}

impl ModelSpec {
    pub fn fit(&self, train: &TabularDataset) -> Result<Model, LearnError> {
        Ok(match self {
            ModelSpec::Linear { cfg } => Model::Linear(fit_linear(train, cfg)?),
            ModelSpec::Mlp { arch, cfg } => Model::Mlp(fit_mlp(train, *arch, cfg)?),
            ModelSpec::Forest(p) => Model::Forest(fit_forest(train, p)?),
            ModelSpec::Gbt(p) => Model::Gbt(fit_gbt(train, p)?),
        })
    }

    /// Same spec with its random seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::Linear { cfg } | ModelSpec::Mlp { cfg, .. } => cfg.seed = seed,
            ModelSpec::Forest(p) => p.seed = seed,
            ModelSpec::Gbt(p) => p.seed = seed,
        }
        out
    }

    /// Row label in accuracy matrices: `Linear`, `RF_<depth>_<trees>`,
    /// `XGB_<depth>_<trees>`, `MLP_<layers>_<units>_<epochs>`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Linear { .. } => "Linear".to_string(),
            ModelSpec::Mlp { arch, cfg } => {
                format!("MLP_{}_{}_{}", arch.layers, arch.units, cfg.epochs)
            }
            ModelSpec::Forest(p) => format!("RF_{}_{}", p.max_depth, p.n_trees),
            ModelSpec::Gbt(p) => format!("XGB_{}_{}", p.max_depth, p.n_trees),
        }
    }
}
