//! Run the four feature extractors on one split and show what each keeps.
//!
//! cargo run --release --example feature_extraction

use perf_oracle::data::{make_classification, train_test_split, SplitSpec, SyntheticSpec};
use perf_oracle::extract::{
    fit_extractor, select_features, spearman_matrix, ward_cluster, ExtractorConfig, ExtractorKind,
    FittedExtractor, Target,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = make_classification(&SyntheticSpec {
        n_samples: 300,
        n_features: 10,
        n_informative: 4,
        seed: 2,
        ..Default::default()
    })?;
    let (train, valid) = train_test_split(&ds, SplitSpec::new(0.67, 2)?)?;
    let cfg = ExtractorConfig::default();

    for kind in ExtractorKind::ALL {
        let fitted = fit_extractor(kind, &train, &valid, &cfg)?;
        let target = match kind {
            ExtractorKind::Cluster => Target::Height(0.8),
            _ => Target::Count(4),
        };
        let reduced = select_features(&valid, &fitted, target)?;
        println!("{kind:<4} keeps {:?}", reduced.feature_names());
        if let FittedExtractor::Ranked { ranking, .. } = &fitted {
            let top: Vec<String> = ranking
                .order
                .iter()
                .take(4)
                .map(|&j| format!("f{j}={:.3}", ranking.scores[j]))
                .collect();
            println!("     top scores {}", top.join(" "));
        }
    }

    let dend = ward_cluster(&spearman_matrix(train.x().view())?)?;
    println!("ward merge heights:");
    for m in &dend.merges {
        println!(
            "  {:>2} + {:>2} -> size {:>2} at {:.4}",
            m.a, m.b, m.size, m.height
        );
    }
    Ok(())
}
