use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{als_fit, predict_entry, AccuracyMatrix, AlsParams, MfError};
use crate::rng::{derive, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    pub test_ratios: Vec<f64>,
    pub repeats: usize,
    pub als: AlsParams,
    pub seed: u64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            test_ratios: vec![0.1, 0.12, 0.3, 0.5, 0.7, 0.9, 0.95],
            repeats: 5,
            als: AlsParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub test_ratio: f64,
    pub n_test: usize,
    pub repeats: usize,
    pub mae: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// `test_ratio,n_test,repeats,mae,rmse` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test_ratio,n_test,repeats,mae,rmse\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.test_ratio, r.n_test, r.repeats, r.mae, r.rmse
            ));
        }
        out
    }
}

/// Number of cells hidden for `ratio`.
pub fn test_count(n_observed: usize, ratio: f64) -> Result<usize, MfError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(MfError::NothingToTrain(ratio));
    }
    let n = (ratio * n_observed as f64).round() as usize;
    if n == 0 {
        return Err(MfError::EmptyTest(ratio));
    }
    if n >= n_observed {
        return Err(MfError::NothingToTrain(ratio));
    }
    Ok(n)
}

/// Seeded uniform sample of `n_test` observed cells. Cells whose removal
/// would empty their row or column are taken last, so every row and column
/// keeps a training entry whenever the budget allows.
pub fn mask_entries(matrix: &AccuracyMatrix, n_test: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = matrix
        .entries()
        .into_iter()
        .map(|(i, j, _)| (i, j))
        .collect();
    cells.shuffle(&mut seeded(seed));
    let mut row_left = vec![0usize; matrix.n_rows()];
    let mut col_left = vec![0usize; matrix.n_cols()];
    for &(i, j) in &cells {
        row_left[i] += 1;
        col_left[j] += 1;
    }
    let mut taken = vec![false; cells.len()];
    let mut chosen = Vec::with_capacity(n_test);
    for (idx, &(i, j)) in cells.iter().enumerate() {
        if chosen.len() == n_test {
            break;
        }
        if row_left[i] > 1 && col_left[j] > 1 {
            row_left[i] -= 1;
            col_left[j] -= 1;
            taken[idx] = true;
            chosen.push((i, j));
        }
    }
    for (idx, &cell) in cells.iter().enumerate() {
        if chosen.len() == n_test {
            break;
        }
        if !taken[idx] {
            chosen.push(cell);
        }
    }
    chosen
}

/// Mean MAE and RMSE on hidden cells, per test ratio, over seeded repeats.
pub fn holdout_eval(matrix: &AccuracyMatrix, params: &EvalParams) -> Result<EvalReport, MfError> {
    if params.repeats == 0 {
        return Err(MfError::InvalidParam("repeats must be >= 1".into()));
    }
    let n_obs = matrix.n_observed();
    let counts = params
        .test_ratios
        .iter()
        .map(|&r| test_count(n_obs, r))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..counts.len())
        .flat_map(|r| (0..params.repeats).map(move |t| (r, t)))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(r, t)| {
            let ratio = params.test_ratios[r];
            let seed = derive(params.seed, &format!("holdout:{ratio}:{t}"));
            let hidden = mask_entries(matrix, counts[r], seed);
            let f = als_fit(&matrix.masked(&hidden), &params.als)?;
            let (mut abs, mut sq) = (0.0, 0.0);
            for &(i, j) in &hidden {
                let err = predict_entry(&f, i, j)? - matrix.values[[i, j]];
                abs += err.abs();
                sq += err * err;
            }
            let n = hidden.len() as f64;
            Ok((abs / n, (sq / n).sqrt()))
        })
        .collect::<Result<Vec<(f64, f64)>, MfError>>()?;
    let rows = scores
        .chunks(params.repeats)
        .enumerate()
        .map(|(r, chunk)| {
            let reps = chunk.len() as f64;
            EvalRow {
                test_ratio: params.test_ratios[r],
                n_test: counts[r],
                repeats: chunk.len(),
                mae: chunk.iter().map(|s| s.0).sum::<f64>() / reps,
                rmse: chunk.iter().map(|s| s.1).sum::<f64>() / reps,
            }
        })
        .collect();
    Ok(EvalReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn grid(m: usize, d: usize) -> AccuracyMatrix {
        AccuracyMatrix::dense(
            (0..m).map(|i| format!("r{i}")).collect(),
            (0..d).map(|j| format!("c{j}")).collect(),
            Array2::from_shape_fn((m, d), |(i, j)| ((i * 7 + j * 3) % 10) as f64 / 10.0),
        )
        .unwrap()
    }

    #[test]
    fn counts_and_errors() {
        assert_eq!(test_count(100, 0.12).unwrap(), 12);
        assert!(matches!(test_count(10, 0.01), Err(MfError::EmptyTest(_))));
        assert!(matches!(
            test_count(10, 1.0),
            Err(MfError::NothingToTrain(_))
        ));
        assert!(matches!(
            test_count(3, 0.9),
            Err(MfError::NothingToTrain(_))
        ));
    }

    #[test]
    fn mask_keeps_rows_and_columns_alive() {
        let m = grid(5, 4);
        let hidden = mask_entries(&m, 10, 7);
        assert_eq!(hidden.len(), 10);
        let rest = m.masked(&hidden);
        for i in 0..5 {
            assert!((0..4).any(|j| rest.observed[[i, j]]));
        }
        for j in 0..4 {
            assert!((0..5).any(|i| rest.observed[[i, j]]));
        }
        assert_eq!(mask_entries(&m, 10, 7), hidden);
    }

    #[test]
    fn report_shape() {
        let params = EvalParams {
            test_ratios: vec![0.2, 0.5],
            repeats: 2,
            als: AlsParams {
                k: Some(2),
                epochs: 20,
                ..Default::default()
            },
            seed: 1,
        };
        let r = holdout_eval(&grid(6, 5), &params).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(row.mae <= row.rmse + 1e-15);
            assert_eq!(row.repeats, 2);
        }
        assert!(r
            .to_csv()
            .starts_with("test_ratio,n_test,repeats,mae,rmse\n0.2,6,2,"));
    }
}
