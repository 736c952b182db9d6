use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Factorization;
use crate::report::{heatmap_svg, Palette};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixAxis {
    Rows,
    Cols,
}

impl std::str::FromStr for MatrixAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rows" | "row" => Ok(MatrixAxis::Rows),
            "cols" | "col" | "columns" => Ok(MatrixAxis::Cols),
            other => Err(format!("unknown axis `{other}` (expected rows or cols)")),
        }
    }
}

/// Latent vector of every row (or column), with its label.
pub fn coordinates(f: &Factorization, axis: MatrixAxis) -> Vec<(String, Vec<f64>)> {
    let (labels, factors) = match axis {
        MatrixAxis::Rows => (&f.row_labels, &f.w),
        MatrixAxis::Cols => (&f.col_labels, &f.h),
    };
    labels
        .iter()
        .zip(factors.rows())
        .map(|(l, v)| (l.clone(), v.to_vec()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub values: Array2<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[[i, j]])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for v in self.values.row(i) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Near pairs green, far pairs red.
    pub fn to_svg(&self, title: &str) -> String {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let cells: Vec<Vec<Option<f64>>> = self
            .values
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&v| Some(v)).collect())
            .collect();
        heatmap_svg(
            title,
            &self.labels,
            &self.labels,
            &cells,
            (0.0, max),
            Palette::GreenRed,
        )
    }
}

/// Euclidean distances between latent vectors.
pub fn distance_matrix(f: &Factorization, axis: MatrixAxis) -> DistanceMatrix {
    let coords = coordinates(f, axis);
    let n = coords.len();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = coords[i]
                .1
                .iter()
                .zip(&coords[j].1)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            values[[i, j]] = d;
            values[[j, i]] = d;
        }
    }
    DistanceMatrix {
        labels: coords.into_iter().map(|(l, _)| l).collect(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fact() -> Factorization {
        Factorization {
            row_labels: vec!["a".into(), "b".into()],
            col_labels: vec!["x".into()],
            k: 2,
            lambda: 0.5,
            epochs: 0,
            seed: 0,
            mu: 0.5,
            row_bias: vec![0.0; 2],
            col_bias: vec![0.0],
            w: array![[0.0, 0.0], [3.0, 4.0]],
            h: array![[1.0, 1.0]],
            objective: vec![],
        }
    }

    #[test]
    fn pythagorean_distance() {
        let d = distance_matrix(&fact(), MatrixAxis::Rows);
        assert_eq!(d.get("a", "b"), Some(5.0));
        assert_eq!(d.get("a", "a"), Some(0.0));
        assert_eq!(d.to_csv(), "label,a,b\na,0,5\nb,5,0\n");
        assert!(d.to_svg("t").contains("#006837"));
    }

    #[test]
    fn coordinates_follow_axis() {
        let c = coordinates(&fact(), MatrixAxis::Cols);
        assert_eq!(c, vec![("x".to_string(), vec![1.0, 1.0])]);
        assert_eq!("rows".parse::<MatrixAxis>(), Ok(MatrixAxis::Rows));
    }
}
