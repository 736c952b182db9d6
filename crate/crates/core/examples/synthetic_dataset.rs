//! Generate the bundled synthetic classification task, write it as CSV,
//! read it back and split it.
//!
//! cargo run --example synthetic_dataset -- [output.csv]

use perf_oracle::data::{
    load_csv, make_classification, save_csv, train_test_split, SplitSpec, SyntheticSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/synthetic.csv".to_string());
    let ds = make_classification(&SyntheticSpec::default())?;
    println!(
        "{}: {} samples, {} features, class counts {:?}",
        ds.id,
        ds.n_samples(),
        ds.n_features(),
        ds.class_counts()
    );
    save_csv(&ds, &out, "label")?;
    let back = load_csv(&out, "label")?;
    assert_eq!(back.x(), ds.x());
    println!("wrote {out}");

    let (train, test) = train_test_split(&back, SplitSpec::default())?;
    println!(
        "split 0.33: train {} / test {}",
        train.n_samples(),
        test.n_samples()
    );
    Ok(())
}
