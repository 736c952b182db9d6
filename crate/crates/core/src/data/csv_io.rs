use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;

use super::{DataError, TabularDataset};
use crate::io::write_atomic;

enum Column {
    Numeric(Vec<f64>),
    Categorical {
        levels: Vec<String>,
        codes: Vec<usize>,
    },
}

/// Loads a classification dataset from a headed CSV file.
///
/// Any column holding at least one non-numeric token is treated as
/// categorical and expanded into one indicator column per level, named
/// `column=level`, in first-appearance order. Labels are mapped to
/// `0..C` in first-appearance order as well.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<TabularDataset, DataError> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, &id, label_column)
}

pub fn load_csv_reader<R: Read>(
    reader: R,
    id: &str,
    label_column: &str,
) -> Result<TabularDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(label_column.to_string()))?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                line: row + 2,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(DataError::MissingValue {
                    row,
                    column: headers[col].clone(),
                });
            }
            cells[col].push(field.to_string());
        }
    }
    let n = cells[label_idx].len();
    if n == 0 {
        return Err(DataError::Empty);
    }

    let (labels, classes) = encode_levels(&cells[label_idx]);
    let n_classes = classes.len();
    if n_classes < 2 {
        return Err(DataError::SingleClass);
    }

    let mut columns = Vec::new();
    for (col, values) in cells.iter().enumerate() {
        if col == label_idx {
            continue;
        }
        let parsed: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok()).collect();
        match parsed {
            Some(nums) => {
                if let Some(row) = nums.iter().position(|v| !v.is_finite()) {
                    let out_col = feature_width(&columns);
                    return Err(DataError::NonFinite { row, col: out_col });
                }
                columns.push(Column::Numeric(nums));
            }
            None => {
                let (codes, levels) = encode_levels(values);
                columns.push(Column::Categorical { levels, codes });
            }
        }
    }

    let feature_headers = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h);
    let mut names = Vec::new();
    for (src, column) in feature_headers.zip(&columns) {
        match column {
            Column::Numeric(_) => names.push(src.clone()),
            Column::Categorical { levels, .. } => {
                names.extend(levels.iter().map(|l| format!("{src}={l}")))
            }
        }
    }

    let d = names.len();
    let mut x = Array2::<f64>::zeros((n, d));
    let mut offset = 0;
    for column in &columns {
        match column {
            Column::Numeric(values) => {
                for (i, v) in values.iter().enumerate() {
                    x[(i, offset)] = *v;
                }
                offset += 1;
            }
            Column::Categorical { levels, codes, .. } => {
                for (i, &c) in codes.iter().enumerate() {
                    x[(i, offset + c)] = 1.0;
                }
                offset += levels.len();
            }
        }
    }
    TabularDataset::new(id, names, x, labels, n_classes)
}

fn feature_width(columns: &[Column]) -> usize {
    columns
        .iter()
        .map(|c| match c {
            Column::Numeric(_) => 1,
            Column::Categorical { levels, .. } => levels.len(),
        })
        .sum()
}

/// Codes in first-appearance order, plus the levels in that order.
fn encode_levels(values: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut map: HashMap<&str, usize> = HashMap::new();
    let mut levels = Vec::new();
    let codes = values
        .iter()
        .map(|v| {
            *map.entry(v.as_str()).or_insert_with(|| {
                levels.push(v.clone());
                levels.len() - 1
            })
        })
        .collect();
    (codes, levels)
}

/// Writes `ds` as CSV with the label as the last column.
///
/// Floats use the shortest representation that parses back to the same
/// value, so [`load_csv`] recovers the feature matrix exactly.
pub fn save_csv(
    ds: &TabularDataset,
    path: impl AsRef<Path>,
    label_column: &str,
) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(label_column);
    wtr.write_record(&header)?;
    for i in 0..ds.n_samples() {
        let mut record: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        record.push(ds.y()[i].to_string());
        wtr.write_record(&record)?;
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path.as_ref(), &bytes)?;
    Ok(())
}
