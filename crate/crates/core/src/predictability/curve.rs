use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CurveError;
use crate::data::{train_test_split, SplitSpec, TabularDataset};
use crate::extract::{
    cluster_schedule, fit_extractor, height_schedule, percent_schedule, select_features,
    ExtractorConfig, ExtractorKind, FittedExtractor, Target,
};
use crate::learners::{accuracy, MlpArch, ModelSpec, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    /// `None` when training or selection failed at this point.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub extractor: ExtractorKind,
    pub dataset: String,
    pub model: String,
    pub points: Vec<CurvePoint>,
}

impl AccuracyCurve {
    pub fn new(
        extractor: ExtractorKind,
        dataset: impl Into<String>,
        model: impl Into<String>,
        points: Vec<CurvePoint>,
    ) -> Result<Self, CurveError> {
        for w in points.windows(2) {
            if w[1].k <= w[0].k {
                return Err(CurveError::NotIncreasing {
                    prev: w[0].k,
                    next: w[1].k,
                });
            }
        }
        for p in &points {
            if let Some(a) = p.accuracy {
                if !(0.0..=1.0).contains(&a) {
                    return Err(CurveError::AccuracyOutOfRange(a));
                }
            }
        }
        Ok(Self {
            extractor,
            dataset: dataset.into(),
            model: model.into(),
            points,
        })
    }

    /// Accuracies of the points that were evaluated successfully.
    pub fn observed(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.accuracy).collect()
    }

    /// Evaluated steps: observed points minus one.
    pub fn n(&self) -> usize {
        self.observed().len().saturating_sub(1)
    }

    pub fn has_gaps(&self) -> bool {
        self.points.iter().any(|p| p.accuracy.is_none())
    }

    /// `k,accuracy` rows; failed points leave the accuracy blank.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CurveError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "accuracy"])?;
        for p in &self.points {
            let acc = p.accuracy.map(|a| a.to_string()).unwrap_or_default();
            w.write_record([p.k.to_string(), acc])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(
        input: R,
        extractor: ExtractorKind,
        dataset: impl Into<String>,
        model: impl Into<String>,
    ) -> Result<Self, CurveError> {
        let mut r = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
            let k = field(0)
                .parse()
                .map_err(|_| CurveError::Malformed(format!("bad k `{}`", field(0))))?;
            let accuracy = match field(1) {
                "" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| CurveError::Malformed(format!("bad accuracy `{s}`")))?,
                ),
            };
            points.push(CurvePoint { k, accuracy });
        }
        Self::new(extractor, dataset, model, points)
    }

    pub fn load_csv(
        path: impl AsRef<Path>,
        extractor: ExtractorKind,
        dataset: impl Into<String>,
        model: impl Into<String>,
    ) -> Result<Self, CurveError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, extractor, dataset, model)
    }
}

/// Feature counts (or cut heights) to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `ceil(d / steps)` increments for ranking and PCA extractors; the
    /// standard height ladder for the cluster extractor.
    Standard {
        steps: usize,
    },
    Counts(Vec<usize>),
    Heights(Vec<f64>),
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Standard { steps: 10 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    pub split: SplitSpec,
    pub extractor: ExtractorConfig,
}

impl CurveConfig {
    /// The probe classifier used to measure every curve point: an MLP with
    /// 4 hidden layers of 128 units.
    pub fn default_probe() -> ModelSpec {
        ModelSpec::Mlp {
            arch: MlpArch::new(4, 128),
            cfg: TrainConfig::default(),
        }
    }
}

fn resolve(
    schedule: &Schedule,
    fitted: &FittedExtractor,
    d: usize,
) -> Result<Vec<(usize, Target)>, CurveError> {
    let kind = fitted.kind();
    let targets = match (schedule, fitted) {
        (Schedule::Standard { .. }, FittedExtractor::Clustered { dendrogram }) => {
            cluster_schedule(dendrogram, &height_schedule())?
                .into_iter()
                .map(|(k, h)| (k, Target::Height(h)))
                .collect()
        }
        (Schedule::Heights(hs), FittedExtractor::Clustered { dendrogram }) => {
            cluster_schedule(dendrogram, hs)?
                .into_iter()
                .map(|(k, h)| (k, Target::Height(h)))
                .collect()
        }
        (Schedule::Standard { steps }, _) => percent_schedule(d, *steps)
            .into_iter()
            .map(|k| (k, Target::Count(k)))
            .collect(),
        (
            Schedule::Counts(ks),
            FittedExtractor::Ranked { .. } | FittedExtractor::Projected { .. },
        ) => {
            let mut ks = ks.clone();
            ks.sort_unstable();
            ks.dedup();
            if let Some(&k) = ks.iter().find(|&&k| k > d) {
                return Err(CurveError::CountTooLarge { k, d });
            }
            ks.into_iter().map(|k| (k, Target::Count(k))).collect()
        }
        _ => return Err(CurveError::ScheduleMismatch(kind.tag())),
    };
    Ok(targets)
}

/// Accuracy of a fresh `model` trained on each reduced training split.
///
/// The split, the extractor fit and the model seed are shared across points,
/// so only the feature set varies. A point whose selection or training fails
/// is kept as a gap.
pub fn build_curve(
    ds: &TabularDataset,
    kind: ExtractorKind,
    model: &ModelSpec,
    schedule: &Schedule,
    cfg: &CurveConfig,
) -> Result<AccuracyCurve, CurveError> {
    let (train, test) = train_test_split(ds, cfg.split)?;
    let fitted = fit_extractor(kind, &train, &test, &cfg.extractor)?;
    let targets = resolve(schedule, &fitted, ds.n_features())?;
    if targets.is_empty() {
        return Err(CurveError::EmptySchedule);
    }
    let points = targets
        .par_iter()
        .map(|&(k, target)| {
            let evaluate = || -> Option<f64> {
                let tr = select_features(&train, &fitted, target).ok()?;
                let te = select_features(&test, &fitted, target).ok()?;
                let m = model.fit(&tr).ok()?;
                accuracy(&m, &te).ok()
            };
            CurvePoint {
                k,
                accuracy: evaluate(),
            }
        })
        .collect();
    AccuracyCurve::new(kind, ds.id.clone(), model.label(), points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(acc: &[Option<f64>]) -> AccuracyCurve {
        let points = acc
            .iter()
            .enumerate()
            .map(|(i, &a)| CurvePoint {
                k: i + 1,
                accuracy: a,
            })
            .collect();
        AccuracyCurve::new(ExtractorKind::Pca, "ds", "m", points).unwrap()
    }

    #[test]
    fn csv_roundtrip_keeps_gaps() {
        let c = curve(&[Some(0.5), None, Some(0.625)]);
        let text = c.to_csv_string();
        assert_eq!(text, "k,accuracy\n1,0.5\n2,\n3,0.625\n");
        let back = AccuracyCurve::read_csv(text.as_bytes(), ExtractorKind::Pca, "ds", "m").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.n(), 1);
    }

    #[test]
    fn rejects_non_increasing_counts() {
        let p = |k| CurvePoint {
            k,
            accuracy: Some(0.5),
        };
        assert!(AccuracyCurve::new(ExtractorKind::Gain, "d", "m", vec![p(2), p(2)]).is_err());
    }
}
