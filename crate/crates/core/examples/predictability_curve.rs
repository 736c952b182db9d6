//! Build accuracy-vs-feature-count curves for every extractor, score them
//! and print the summary table.
//!
//! cargo run --release --example predictability_curve -- [rho_star]

use perf_oracle::data::{load_csv, SplitSpec};
use perf_oracle::extract::{ExtractorConfig, ExtractorKind};
use perf_oracle::learners::{MlpArch, ModelSpec, TrainConfig};
use perf_oracle::predictability::{
    alpha_score, build_curve, rho_score, summary_table, CurveConfig, Schedule, SummaryRow,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho_star: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.6);
    let ds = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/synthetic.csv"),
        "label",
    )?;
    let probe = ModelSpec::Mlp {
        arch: MlpArch::new(2, 32),
        cfg: TrainConfig {
            epochs: 40,
            ..Default::default()
        },
    };
    let cfg = CurveConfig {
        split: SplitSpec::new(0.33, 7)?,
        extractor: ExtractorConfig::default(),
    };

    let mut row = SummaryRow {
        dataset: ds.id.clone(),
        reports: Vec::new(),
    };
    let mut scored = Vec::new();
    for kind in ExtractorKind::ALL {
        let curve = build_curve(&ds, kind, &probe, &Schedule::default(), &cfg)?;
        print!("{kind}:\n{}", curve.to_csv_string());
        let report = rho_score(&curve).ok();
        scored.extend(report.clone());
        row.reports.push((kind, report));
    }
    print!("\n{}", summary_table(&[row], &ExtractorKind::ALL));
    let a = alpha_score(&scored, rho_star)?;
    println!(
        "alpha at rho* = {rho_star}: {} ({}/{})",
        a.alpha, a.qualifying, a.total
    );
    Ok(())
}
