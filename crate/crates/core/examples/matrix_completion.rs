//! Factorize the bundled accuracy matrix, predict a hidden cell, score the
//! masked holdout and print the nearest datasets in latent space.
//!
//! cargo run --release --example matrix_completion

use perf_oracle::mfpredict::{
    als_fit, distance_matrix, holdout_eval, load_matrix, predict_entry, AlsParams, EvalParams,
    MatrixAxis,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The file stores datasets as rows; models become rows after transposing.
    let full = load_matrix(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/accuracy_matrix.csv"
    ))?
    .transpose();
    println!(
        "{} models x {} datasets, {} observed",
        full.n_rows(),
        full.n_cols(),
        full.n_observed()
    );

    let (i, j) = (1, 0);
    let truth = full.get(i, j).expect("observed");
    let als = AlsParams {
        lambda: 0.5,
        epochs: 500,
        ..Default::default()
    };
    let f = als_fit(&full.masked(&[(i, j)]), &als)?;
    println!(
        "hidden {} on {}: predicted {:.4}, actual {truth:.4}",
        f.row_labels[i],
        f.col_labels[j],
        predict_entry(&f, i, j)?
    );
    println!(
        "objective {:.4} -> {:.4}",
        f.objective[0],
        f.objective.last().unwrap()
    );

    let report = holdout_eval(
        &full,
        &EvalParams {
            test_ratios: vec![0.12, 0.5],
            repeats: 3,
            als,
            seed: 0,
        },
    )?;
    print!("{}", report.to_csv());

    let d = distance_matrix(&f, MatrixAxis::Cols);
    let anchor = &d.labels[0];
    let mut near: Vec<(&String, f64)> = d
        .labels
        .iter()
        .skip(1)
        .map(|l| (l, d.get(anchor, l).unwrap()))
        .collect();
    near.sort_by(|a, b| a.1.total_cmp(&b.1));
    println!("datasets closest to {anchor}: {:?}", &near[..3]);
    Ok(())
}
