use serde::{Deserialize, Serialize};

use super::{
    cluster_features, cut_and_select, gain_importance, pca_fit, pca_transform,
    permutation_importance, spearman_matrix, Dendrogram, ExtractError, FeatureRanking, Linkage,
    Projection,
};
use crate::data::TabularDataset;
use crate::learners::{fit_forest, fit_gbt, ForestParams, GbtParams};

/// The four extractors compared by the predictability study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExtractorKind {
    /// Permutation importance of a random forest.
    #[serde(rename = "RF")]
    Permutation,
    /// Split-gain importance of a boosted ensemble.
    #[serde(rename = "XGB")]
    Gain,
    /// One representative per Spearman cluster.
    #[serde(rename = "SP")]
    Cluster,
    #[serde(rename = "PCA")]
    Pca,
}

impl ExtractorKind {
    pub const ALL: [ExtractorKind; 4] = [
        ExtractorKind::Permutation,
        ExtractorKind::Gain,
        ExtractorKind::Cluster,
        ExtractorKind::Pca,
    ];

    /// Short tag used in tables and file names.
    pub fn tag(self) -> &'static str {
        match self {
            ExtractorKind::Permutation => "RF",
            ExtractorKind::Gain => "XGB",
            ExtractorKind::Cluster => "SP",
            ExtractorKind::Pca => "PCA",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(tag))
    }
}

impl std::fmt::Display for ExtractorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// How much to keep: a feature count (importance and PCA kinds) or a
/// dendrogram cut height (cluster kind).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Count(usize),
    Height(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractorConfig {
    pub forest: ForestParams,
    pub gbt: GbtParams,
    pub n_repeats: usize,
    pub linkage: Linkage,
    pub seed: u64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::new(100, 12, 0),
            gbt: GbtParams::default(),
            n_repeats: 5,
            linkage: Linkage::Ward,
            seed: 0,
        }
    }
}

/// Whatever an extractor learned from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedExtractor {
    Ranked {
        extractor: ExtractorKind,
        ranking: FeatureRanking,
    },
    Clustered {
        dendrogram: Dendrogram,
    },
    Projected {
        projection: Projection,
    },
}

impl FittedExtractor {
    pub fn kind(&self) -> ExtractorKind {
        match self {
            FittedExtractor::Ranked { extractor, .. } => *extractor,
            FittedExtractor::Clustered { .. } => ExtractorKind::Cluster,
            FittedExtractor::Projected { .. } => ExtractorKind::Pca,
        }
    }
}

/// Fit an extractor on `train`; permutation importance is measured on `valid`.
pub fn fit_extractor(
    kind: ExtractorKind,
    train: &TabularDataset,
    valid: &TabularDataset,
    cfg: &ExtractorConfig,
) -> Result<FittedExtractor, ExtractError> {
    Ok(match kind {
        ExtractorKind::Permutation => {
            let model = fit_forest(train, &cfg.forest)?;
            FittedExtractor::Ranked {
                extractor: kind,
                ranking: permutation_importance(&model, valid, cfg.n_repeats, cfg.seed)?,
            }
        }
        ExtractorKind::Gain => {
            let model = fit_gbt(train, &cfg.gbt)?;
            FittedExtractor::Ranked {
                extractor: kind,
                ranking: gain_importance(&model)?,
            }
        }
        ExtractorKind::Cluster => {
            let corr = spearman_matrix(train.x().view())?;
            FittedExtractor::Clustered {
                dendrogram: cluster_features(&corr, cfg.linkage)?,
            }
        }
        ExtractorKind::Pca => FittedExtractor::Projected {
            projection: pca_fit(train.x().view(), train.n_samples().min(train.n_features()))?,
        },
    })
}

/// Reduce `ds` with a fitted extractor.
///
/// Rankings keep the top `count` columns (in rank order), clusters keep the
/// representatives of a cut, and projections keep the first `count`
/// principal coordinates as features `pc0..`.
pub fn select_features(
    ds: &TabularDataset,
    extractor: &FittedExtractor,
    target: Target,
) -> Result<TabularDataset, ExtractError> {
    let d = ds.n_features();
    let check_count = |count: usize, max: usize| {
        if count == 0 || count > max {
            Err(ExtractError::CountOutOfRange { count, max })
        } else {
            Ok(count)
        }
    };
    match (extractor, target) {
        (FittedExtractor::Ranked { ranking, .. }, Target::Count(count)) => {
            check_count(count, d)?;
            Ok(ds.select_columns(ranking.top(count))?)
        }
        (FittedExtractor::Clustered { dendrogram }, Target::Height(h)) => {
            Ok(ds.select_columns(&cut_and_select(dendrogram, h)?)?)
        }
        (FittedExtractor::Projected { projection }, Target::Count(count)) => {
            check_count(count, projection.n_components())?;
            let z = pca_transform(projection, ds.x().view())?;
            let z = z.slice(ndarray::s![.., ..count]).to_owned();
            let names = (0..count).map(|i| format!("pc{i}")).collect();
            Ok(ds.with_features(names, z)?)
        }
        (FittedExtractor::Clustered { .. }, Target::Count(_)) => Err(ExtractError::CountForCluster),
        (other, Target::Height(_)) => Err(ExtractError::HeightForRanking(other.kind().tag())),
    }
}

/// Counts `delta, 2*delta, ...` capped at `d`, with `delta = ceil(d / steps)`.
pub fn percent_schedule(d: usize, steps: usize) -> Vec<usize> {
    if d == 0 || steps == 0 {
        return Vec::new();
    }
    let delta = d.div_ceil(steps);
    let mut out: Vec<usize> = Vec::new();
    let mut k = delta;
    loop {
        let capped = k.min(d);
        if out.last() != Some(&capped) {
            out.push(capped);
        }
        if capped == d {
            return out;
        }
        k += delta;
    }
}

/// Dendrogram cut heights: 0.5 to 3.0 in steps of 0.5, then 4 to 12.
pub fn height_schedule() -> Vec<f64> {
    let fine = (1..=6).map(|i| i as f64 * 0.5);
    let coarse = (4..=12).map(f64::from);
    fine.chain(coarse).collect()
}

/// Distinct `(feature count, first height producing it)` pairs over
/// `heights`, sorted by ascending count.
pub fn cluster_schedule(
    dendrogram: &Dendrogram,
    heights: &[f64],
) -> Result<Vec<(usize, f64)>, ExtractError> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for &h in heights {
        let k = cut_and_select(dendrogram, h)?.len();
        if !out.iter().any(|&(seen, _)| seen == k) {
            out.push((k, h));
        }
    }
    out.sort_by_key(|&(k, _)| k);
    Ok(out)
}
