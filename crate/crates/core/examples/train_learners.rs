//! Fit each learner family on a synthetic task and report held-out accuracy.
//!
//! cargo run --release --example train_learners

use perf_oracle::data::{make_classification, train_test_split, SplitSpec, SyntheticSpec};
use perf_oracle::learners::{
    accuracy, ForestParams, GbtParams, MlpArch, Model, ModelSpec, TrainConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = make_classification(&SyntheticSpec {
        n_samples: 400,
        n_features: 12,
        seed: 3,
        ..Default::default()
    })?;
    let (train, test) = train_test_split(&ds, SplitSpec::new(0.67, 3)?)?;
    let cfg = TrainConfig {
        epochs: 50,
        ..Default::default()
    };
    let specs = [
        ModelSpec::Linear { cfg },
        ModelSpec::Mlp {
            arch: MlpArch::new(2, 32),
            cfg,
        },
        ModelSpec::Forest(ForestParams::new(64, 8, 3)),
        ModelSpec::Gbt(GbtParams {
            n_trees: 64,
            max_depth: 3,
            ..Default::default()
        }),
    ];
    for spec in specs {
        let model = spec.fit(&train)?;
        let json = model.to_json()?;
        let restored = Model::from_json(&json)?;
        println!(
            "{:<16} accuracy {:.3}  ({} bytes as JSON)",
            spec.label(),
            accuracy(&restored, &test)?,
            json.len()
        );
    }
    Ok(())
}
