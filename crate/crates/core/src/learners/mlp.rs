use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::activation::{argmax, relu, relu_grad, sigmoid, softmax_in_place, softplus};
use super::optim::Adam;
use super::{Classifier, LearnError, TrainConfig};
use crate::data::TabularDataset;
use crate::rng::seeded;

/// Hidden-layer count and width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    pub layers: usize,
    pub units: usize,
}

impl MlpArch {
    pub fn new(layers: usize, units: usize) -> Self {
        Self { layers, units }
    }

    fn widths(&self, n_features: usize, n_classes: usize) -> Vec<usize> {
        let mut w = vec![n_features];
        w.extend(std::iter::repeat_n(self.units, self.layers));
        w.push(output_width(n_classes));
        w
    }

    /// Total weights and biases for the given input and class count.
    pub fn n_params(&self, n_features: usize, n_classes: usize) -> usize {
        self.widths(n_features, n_classes)
            .windows(2)
            .map(|p| p[0] * p[1] + p[1])
            .sum()
    }
}

fn output_width(n_classes: usize) -> usize {
    if n_classes == 2 {
        1
    } else {
        n_classes
    }
}

/// Dense layer: `out = in · weights + bias`, weights shaped `(in, out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// ReLU hidden layers; a single sigmoid unit for two classes, softmax
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<MlpLayer>,
    pub arch: MlpArch,
    pub n_classes: usize,
}

impl MlpModel {
    /// He-normal weights (`std = sqrt(2 / fan_in)`), zero biases.
    pub fn init(
        n_features: usize,
        n_classes: usize,
        arch: MlpArch,
        seed: u64,
    ) -> Result<Self, LearnError> {
        if arch.layers == 0 || arch.units == 0 {
            return Err(LearnError::InvalidConfig(
                "MLP needs at least one hidden layer with one unit".into(),
            ));
        }
        if n_features == 0 || n_classes < 2 {
            return Err(LearnError::InvalidConfig(format!(
                "MLP needs >= 1 feature and >= 2 classes, got {n_features} and {n_classes}"
            )));
        }
        let mut rng = seeded(seed);
        let widths = arch.widths(n_features, n_classes);
        let layers = widths
            .windows(2)
            .map(|p| {
                let normal = Normal::new(0.0, (2.0 / p[0] as f64).sqrt()).expect("positive std");
                MlpLayer {
                    weights: Array2::from_shape_simple_fn((p[0], p[1]), || normal.sample(&mut rng)),
                    bias: Array1::zeros(p[1]),
                }
            })
            .collect();
        Ok(Self {
            layers,
            arch,
            n_classes,
        })
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Pre-activations of every layer; the last entry is the output logits.
    fn forward(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = act.dot(&layer.weights) + &layer.bias;
            if i + 1 < self.layers.len() {
                act = z.mapv(relu);
            }
            pre.push(z);
        }
        pre
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward(x).pop().expect("at least one layer")
    }

    /// Mean cross-entropy over the rows of `x`.
    pub fn loss(&self, x: ArrayView2<f64>, y: &[usize]) -> f64 {
        let logits = self.logits(x);
        self.loss_and_output_grad(&logits, y).0
    }

    fn loss_and_output_grad(&self, logits: &Array2<f64>, y: &[usize]) -> (f64, Array2<f64>) {
        let b = logits.nrows() as f64;
        let mut grad = logits.clone();
        let mut loss = 0.0;
        if self.n_classes == 2 {
            for (i, &label) in y.iter().enumerate() {
                let z = logits[(i, 0)];
                let t = label as f64;
                loss += softplus(z) - t * z;
                grad[(i, 0)] = (sigmoid(z) - t) / b;
            }
        } else {
            for (i, mut row) in grad.axis_iter_mut(Axis(0)).enumerate() {
                let z = row.as_slice_mut().expect("contiguous row");
                let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
                loss += lse - z[y[i]];
                softmax_in_place(z);
                z[y[i]] -= 1.0;
                z.iter_mut().for_each(|v| *v /= b);
            }
        }
        (loss / b, grad)
    }

    /// Mean cross-entropy and its gradient with respect to every layer.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, y: &[usize]) -> (f64, Vec<LayerGrad>) {
        let pre = self.forward(x);
        let (loss, mut delta) = self.loss_and_output_grad(pre.last().expect("layers"), y);
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let input = if i == 0 {
                x.to_owned()
            } else {
                pre[i - 1].mapv(relu)
            };
            let grad_w = input.t().dot(&delta);
            let grad_b = delta.sum_axis(Axis(0));
            if i > 0 {
                let back = delta.dot(&self.layers[i].weights.t());
                delta = back * pre[i - 1].mapv(relu_grad);
            }
            grads.push(LayerGrad {
                weights: grad_w.as_standard_layout().into_owned(),
                bias: grad_b,
            });
        }
        grads.reverse();
        (loss, grads)
    }

    /// All parameters, layer by layer: weights (row-major) then bias.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            out.extend(layer.weights.iter());
            out.extend(layer.bias.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<(), LearnError> {
        if params.len() != self.n_params() {
            return Err(LearnError::ArityMismatch {
                expected: self.n_params(),
                found: params.len(),
            });
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut() {
                *w = params[offset];
                offset += 1;
            }
            for b in layer.bias.iter_mut() {
                *b = params[offset];
                offset += 1;
            }
        }
        Ok(())
    }

    pub(crate) fn validate_shapes(&self, n_features: usize) -> Result<(), LearnError> {
        let mut width = n_features;
        for layer in &self.layers {
            if layer.weights.nrows() != width || layer.bias.len() != layer.weights.ncols() {
                return Err(LearnError::Malformed(
                    "MLP layer dimensions disagree".into(),
                ));
            }
            width = layer.weights.ncols();
        }
        if width != output_width(self.n_classes) {
            return Err(LearnError::Malformed("MLP output width".into()));
        }
        Ok(())
    }
}

impl LayerGrad {
    pub fn flatten(grads: &[LayerGrad]) -> Vec<f64> {
        grads
            .iter()
            .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
            .collect()
    }
}

impl Classifier for MlpModel {
    fn n_features(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let x = ArrayView2::from_shape((1, row.len()), row).expect("row shape");
        let logits = self.logits(x);
        if self.n_classes == 2 {
            usize::from(logits[(0, 0)] > 0.0)
        } else {
            argmax(logits.row(0).as_slice().expect("contiguous"))
        }
    }
}

/// Mini-batch Adam on cross-entropy, deterministic given `cfg.seed`.
pub fn fit_mlp(
    train: &TabularDataset,
    arch: MlpArch,
    cfg: &TrainConfig,
) -> Result<MlpModel, LearnError> {
    cfg.validate()?;
    let mut model = MlpModel::init(train.n_features(), train.n_classes(), arch, cfg.seed)?;
    let mut opt: Vec<(Adam, Adam)> = model
        .layers
        .iter()
        .map(|l| {
            (
                Adam::new(l.weights.len(), cfg),
                Adam::new(l.bias.len(), cfg),
            )
        })
        .collect();
    let mut rng = seeded(crate::rng::derive(cfg.seed, "mlp-batches"));
    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = train.x().select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| train.y()[i]).collect();
            let (_, grads) = model.loss_and_gradients(xb.view(), &yb);
            for ((layer, grad), (ow, ob)) in model.layers.iter_mut().zip(&grads).zip(&mut opt) {
                ow.update(
                    layer.weights.as_slice_mut().expect("standard layout"),
                    grad.weights.as_slice().expect("standard layout"),
                );
                ob.update(
                    layer.bias.as_slice_mut().expect("contiguous"),
                    grad.bias.as_slice().expect("contiguous"),
                );
            }
        }
    }
    Ok(model)
}
