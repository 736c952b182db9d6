use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::DataError;
use crate::io::write_atomic;

/// Source of remote bytes. The HTTP implementation is the default; tests and
/// offline tooling can swap in their own.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Vec<u8>, DataError>;
}

/// Blocking HTTP(S) transport backed by `ureq`.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>, DataError> {
        let mut resp = ureq::get(url)
            .call()
            .map_err(|e| DataError::FetchFailed(format!("{url}: {e}")))?;
        resp.body_mut()
            .with_config()
            .limit(1 << 30)
            .read_to_vec()
            .map_err(|e| DataError::FetchFailed(format!("{url}: {e}")))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<cache_dir>/<sha256(url)>.csv`
pub fn cache_path(cache_dir: &Path, url: &str) -> PathBuf {
    cache_dir.join(format!("{}.csv", sha256_hex(url.as_bytes())))
}

fn checksum_path(data: &Path) -> PathBuf {
    data.with_extension("sha256")
}

pub fn fetch_dataset(url: &str, cache_dir: impl AsRef<Path>) -> Result<PathBuf, DataError> {
    fetch_dataset_with(url, cache_dir, &HttpTransport)
}

/// Downloads `url` into the cache once and returns the local path.
///
/// Next to each cached file sits a `.sha256` record of its content. A cached
/// file that still matches its record is returned without touching the
/// network. A file that no longer matches is downloaded again, and the fresh
/// bytes must hash to the recorded value.
pub fn fetch_dataset_with(
    url: &str,
    cache_dir: impl AsRef<Path>,
    transport: &dyn Transport,
) -> Result<PathBuf, DataError> {
    if !(url.starts_with("http://") || url.starts_with("https://")) {
        return Err(DataError::UnsupportedUrl(url.to_string()));
    }
    let cache_dir = cache_dir.as_ref();
    let path = cache_path(cache_dir, url);
    let sum_path = checksum_path(&path);
    let recorded = fs::read_to_string(&sum_path)
        .ok()
        .map(|s| s.trim().to_string());

    if let Ok(bytes) = fs::read(&path) {
        let actual = sha256_hex(&bytes);
        match &recorded {
            Some(expected) if *expected == actual => return Ok(path),
            None => {
                write_atomic(&sum_path, actual.as_bytes())?;
                return Ok(path);
            }
            Some(_) => {}
        }
    }

    let bytes = transport.get(url)?;
    let actual = sha256_hex(&bytes);
    if let Some(expected) = recorded {
        if expected != actual {
            return Err(DataError::ChecksumMismatch {
                url: url.to_string(),
                expected,
                found: actual,
            });
        }
    }
    write_atomic(&path, &bytes)?;
    write_atomic(&sum_path, actual.as_bytes())?;
    Ok(path)
}
