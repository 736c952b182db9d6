//! Versioned JSON documents for trained models. Dense layers are stored as
//! shapes plus flat row-major arrays; trees as flat preorder node lists.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{
    ForestModel, GbtModel, LearnError, LinearModel, MlpArch, MlpLayer, MlpModel, Model, TreeNode,
};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "perf-oracle-model";

/// One tree node in preorder: a split is followed by its whole left
/// subtree, then its right subtree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlatNode<L> {
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
    },
    Leaf {
        leaf: L,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelBody {
    Linear {
        n_classes: usize,
        w: Vec<f64>,
        beta: f64,
    },
    Mlp {
        n_classes: usize,
        layers: usize,
        units: usize,
        shapes: Vec<[usize; 2]>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    },
    Forest {
        n_classes: usize,
        n_features: usize,
        max_depth: usize,
        feature_subsample: usize,
        seed: u64,
        trees: Vec<Vec<FlatNode<Vec<f64>>>>,
    },
    Gbt {
        n_classes: usize,
        n_features: usize,
        max_depth: usize,
        eta: f64,
        lambda: f64,
        gamma: f64,
        base_score: Vec<f64>,
        rounds: Vec<Vec<Vec<FlatNode<f64>>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: ModelBody,
}

fn flatten<L: Clone>(node: &TreeNode<L>, out: &mut Vec<FlatNode<L>>) {
    match node {
        TreeNode::Leaf { value } => out.push(FlatNode::Leaf {
            leaf: value.clone(),
        }),
        TreeNode::Split {
            feature,
            threshold,
            gain,
            left,
            right,
        } => {
            out.push(FlatNode::Split {
                feature: *feature,
                threshold: *threshold,
                gain: *gain,
            });
            flatten(left, out);
            flatten(right, out);
        }
    }
}

fn rebuild<L: Clone>(nodes: &[FlatNode<L>]) -> Result<TreeNode<L>, LearnError> {
    fn go<L: Clone>(nodes: &[FlatNode<L>], pos: &mut usize) -> Result<TreeNode<L>, LearnError> {
        let node = nodes
            .get(*pos)
            .ok_or_else(|| LearnError::Malformed("truncated preorder tree".into()))?;
        *pos += 1;
        Ok(match node {
            FlatNode::Leaf { leaf } => TreeNode::leaf(leaf.clone()),
            FlatNode::Split {
                feature,
                threshold,
                gain,
            } => {
                let left = go(nodes, pos)?;
                let right = go(nodes, pos)?;
                TreeNode::split(*feature, *threshold, *gain, left, right)
            }
        })
    }
    let mut pos = 0;
    let tree = go(nodes, &mut pos)?;
    if pos != nodes.len() {
        return Err(LearnError::Malformed("trailing nodes after tree".into()));
    }
    Ok(tree)
}

fn preorder<L: Clone>(tree: &TreeNode<L>) -> Vec<FlatNode<L>> {
    let mut out = Vec::new();
    flatten(tree, &mut out);
    out
}

fn check_features<L>(tree: &TreeNode<L>, n_features: usize) -> Result<(), LearnError> {
    match tree.max_feature() {
        Some(f) if f >= n_features => Err(LearnError::Malformed(format!(
            "split on feature {f} but model has {n_features}"
        ))),
        _ => Ok(()),
    }
}

impl ModelDocument {
    pub fn from_model(model: &Model) -> Self {
        let body = match model {
            Model::Linear(m) => ModelBody::Linear {
                n_classes: m.n_classes,
                w: m.w.clone(),
                beta: m.beta,
            },
            Model::Mlp(m) => ModelBody::Mlp {
                n_classes: m.n_classes,
                layers: m.arch.layers,
                units: m.arch.units,
                shapes: m
                    .layers
                    .iter()
                    .map(|l| [l.weights.nrows(), l.weights.ncols()])
                    .collect(),
                weights: m
                    .layers
                    .iter()
                    .map(|l| l.weights.iter().copied().collect())
                    .collect(),
                biases: m.layers.iter().map(|l| l.bias.to_vec()).collect(),
            },
            Model::Forest(m) => ModelBody::Forest {
                n_classes: m.n_classes,
                n_features: m.n_features,
                max_depth: m.max_depth,
                feature_subsample: m.feature_subsample,
                seed: m.seed,
                trees: m.trees.iter().map(preorder).collect(),
            },
            Model::Gbt(m) => ModelBody::Gbt {
                n_classes: m.n_classes,
                n_features: m.n_features,
                max_depth: m.max_depth,
                eta: m.eta,
                lambda: m.lambda,
                gamma: m.gamma,
                base_score: m.base_score.clone(),
                rounds: m
                    .rounds
                    .iter()
                    .map(|r| r.iter().map(preorder).collect())
                    .collect(),
            },
        };
        Self {
            format: FORMAT_NAME.to_string(),
            version: MODEL_FORMAT_VERSION,
            model: body,
        }
    }

    pub fn into_model(self) -> Result<Model, LearnError> {
        if self.format != FORMAT_NAME {
            return Err(LearnError::Malformed(format!(
                "unknown format `{}`",
                self.format
            )));
        }
        if self.version != MODEL_FORMAT_VERSION {
            return Err(LearnError::UnsupportedVersion(self.version));
        }
        Ok(match self.model {
            ModelBody::Linear { n_classes, w, beta } => {
                Model::Linear(LinearModel { w, beta, n_classes })
            }
            ModelBody::Mlp {
                n_classes,
                layers,
                units,
                shapes,
                weights,
                biases,
            } => {
                if shapes.len() != weights.len()
                    || shapes.len() != biases.len()
                    || shapes.is_empty()
                {
                    return Err(LearnError::Malformed("MLP layer arrays disagree".into()));
                }
                let mut built = Vec::with_capacity(shapes.len());
                for (([rows, cols], w), b) in shapes.into_iter().zip(weights).zip(biases) {
                    let weights = Array2::from_shape_vec((rows, cols), w)
                        .map_err(|e| LearnError::Malformed(e.to_string()))?;
                    built.push(MlpLayer {
                        weights,
                        bias: Array1::from(b),
                    });
                }
                let n_features = built[0].weights.nrows();
                let model = MlpModel {
                    layers: built,
                    arch: MlpArch::new(layers, units),
                    n_classes,
                };
                model.validate_shapes(n_features)?;
                Model::Mlp(model)
            }
            ModelBody::Forest {
                n_classes,
                n_features,
                max_depth,
                feature_subsample,
                seed,
                trees,
            } => {
                let trees = trees
                    .iter()
                    .map(|t| rebuild(t))
                    .collect::<Result<Vec<_>, _>>()?;
                for t in &trees {
                    check_features(t, n_features)?;
                }
                Model::Forest(ForestModel {
                    trees,
                    max_depth,
                    feature_subsample,
                    seed,
                    n_features,
                    n_classes,
                })
            }
            ModelBody::Gbt {
                n_classes,
                n_features,
                max_depth,
                eta,
                lambda,
                gamma,
                base_score,
                rounds,
            } => {
                let rounds = rounds
                    .iter()
                    .map(|r| r.iter().map(|t| rebuild(t)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                for t in rounds.iter().flatten() {
                    check_features(t, n_features)?;
                }
                Model::Gbt(GbtModel {
                    base_score,
                    rounds,
                    eta,
                    lambda,
                    gamma,
                    max_depth,
                    n_features,
                    n_classes,
                })
            }
        })
    }
}

impl Model {
    pub fn to_json(&self) -> Result<String, LearnError> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from_model(
            self,
        ))?)
    }

    pub fn from_json(text: &str) -> Result<Model, LearnError> {
        serde_json::from_str::<ModelDocument>(text)?.into_model()
    }
}
