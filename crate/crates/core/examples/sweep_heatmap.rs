//! Sweep a random forest over depth x tree count, write the heatmap and
//! classify its shape.
//!
//! cargo run --release --example sweep_heatmap -- [out_dir] [tau]

use perf_oracle::data::{make_classification, SyntheticSpec};
use perf_oracle::sweep::{detect_pattern, emit_heatmap, run_sweep, GridSpec, LearnerKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "target/sweep_heatmap".into());
    let tau: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.7);

    let ds = make_classification(&SyntheticSpec {
        n_samples: 300,
        n_features: 10,
        seed: 1,
        ..Default::default()
    })?;
    let grid = GridSpec {
        axis2: vec![2, 4, 8, 16, 32, 64],
        ..GridSpec::standard(LearnerKind::Forest)
    };
    let heat = run_sweep(&ds, &grid)?;
    print!("{}", heat.to_csv());
    let (csv, svg) = emit_heatmap(&heat, &out)?;
    println!("wrote {} and {}", csv.display(), svg.display());

    let v = detect_pattern(&heat, tau)?;
    println!(
        "pattern {} (axis1 {:.2}, axis2 {:.2}, tau {tau})",
        v.kind, v.axis1_fraction, v.axis2_fraction
    );
    Ok(())
}
