//! Feature extraction: model-agnostic permutation importance, boosting gain
//! importance, Spearman-correlation hierarchical clustering, and PCA, plus
//! the selection step that turns any of them into a reduced dataset.

mod cluster;
mod pca;
mod ranking;
mod select;
mod spearman;

pub use cluster::{cluster_features, cut_and_select, ward_cluster, Dendrogram, Linkage, Merge};
pub use pca::{pca_fit, pca_transform, Projection};
pub use ranking::{gain_importance, permutation_importance, FeatureRanking};
pub use select::{
    cluster_schedule, fit_extractor, height_schedule, percent_schedule, select_features,
    ExtractorConfig, ExtractorKind, FittedExtractor, Target,
};
pub use spearman::{mid_ranks, spearman_matrix, CorrelationMatrix};

use crate::data::DataError;
use crate::learners::LearnError;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("empty validation set")]
    EmptyValidation,
    #[error("all-leaf model: no splits to attribute gain to")]
    AllLeafModel,
    #[error("need at least {needed} features, got {found}")]
    TooFewFeatures { needed: usize, found: usize },
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("k = {k} out of range 1..={max}")]
    ComponentsOutOfRange { k: usize, max: usize },
    #[error("feature count {count} out of range 1..={max}")]
    CountOutOfRange { count: usize, max: usize },
    #[error("cluster extractor takes a height, not a feature count")]
    CountForCluster,
    #[error("{0} extractor takes a feature count, not a height")]
    HeightForRanking(&'static str),
    #[error("invalid height {0}")]
    InvalidHeight(f64),
    #[error("arity mismatch: expected {expected} features, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("correlation matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}
