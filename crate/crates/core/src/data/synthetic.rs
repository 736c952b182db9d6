use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DataError, TabularDataset};
use crate::rng::seeded;

/// Gaussian-cluster classification task in the spirit of scikit-learn's
/// `make_classification`: the first `n_informative` columns carry the class
/// signal, the remaining columns are pure noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub n_classes: usize,
    pub class_sep: f64,
    /// Fraction of labels replaced by a uniformly random class.
    pub flip_y: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_samples: 500,
            n_features: 20,
            n_informative: 5,
            n_classes: 2,
            class_sep: 1.0,
            flip_y: 0.01,
            seed: 0,
        }
    }
}

pub fn make_classification(spec: &SyntheticSpec) -> Result<TabularDataset, DataError> {
    let SyntheticSpec {
        n_samples: n,
        n_features: d,
        n_informative: k,
        n_classes: c,
        ..
    } = *spec;
    if k == 0 || k > d {
        return Err(DataError::Shape {
            expected: d,
            found: k,
        });
    }
    let mut rng = seeded(spec.seed);
    // One hypercube vertex per class, distinct as long as 2^k >= c.
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|class| {
            (0..k)
                .map(|bit| {
                    let sign = if (class >> (bit % usize::BITS as usize)) & 1 == 1 {
                        1.0
                    } else {
                        -1.0
                    };
                    let jitter: f64 = rng.random_range(0.5..1.5);
                    sign * spec.class_sep * jitter
                })
                .collect()
        })
        .collect();

    let mut x = Array2::<f64>::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % c;
        for j in 0..d {
            let noise: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = if j < k {
                centers[class][j] + noise
            } else {
                noise
            };
        }
        let label = if rng.random::<f64>() < spec.flip_y {
            rng.random_range(0..c)
        } else {
            class
        };
        y.push(label);
    }
    let names = (0..d).map(|j| format!("f{j}")).collect();
    TabularDataset::new("synthetic", names, x, y, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let ds = make_classification(&SyntheticSpec::default()).unwrap();
        assert_eq!(ds.n_samples(), 500);
        assert_eq!(ds.n_features(), 20);
        assert_eq!(ds.n_classes(), 2);
        let counts = ds.class_counts();
        assert!(counts.iter().all(|&c| c > 200));
    }

    #[test]
    fn reproducible() {
        let spec = SyntheticSpec::default();
        assert_eq!(
            make_classification(&spec).unwrap(),
            make_classification(&spec).unwrap()
        );
    }
}
