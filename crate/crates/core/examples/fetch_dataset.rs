//! Download a CSV into the content-addressed cache and load it. With no URL
//! argument a local transport serves the bundled dataset, so this runs
//! offline.
//!
//! PERF_ORACLE_CACHE=target/cache cargo run --example fetch_dataset -- [url] [label]

use perf_oracle::cli::CACHE_ENV;
use perf_oracle::data::{fetch_dataset, fetch_dataset_with, load_csv, DataError, Transport};

struct Bundled;

impl Transport for Bundled {
    fn get(&self, _url: &str) -> Result<Vec<u8>, DataError> {
        Ok(include_bytes!("../fixtures/synthetic.csv").to_vec())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let url = args.next();
    let label = args.next().unwrap_or_else(|| "label".into());
    let cache = std::env::var(CACHE_ENV).unwrap_or_else(|_| "target/cache".into());

    let path = match &url {
        Some(u) => fetch_dataset(u, &cache)?,
        None => fetch_dataset_with("https://example.invalid/synthetic.csv", &cache, &Bundled)?,
    };
    println!("cached at {}", path.display());
    let ds = load_csv(&path, &label)?;
    println!(
        "{} rows, {} features, classes {:?}",
        ds.n_samples(),
        ds.n_features(),
        ds.class_counts()
    );
    Ok(())
}
