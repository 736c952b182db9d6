use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AccuracyCurve, CurveError};
use crate::extract::ExtractorKind;

/// Share of consecutive steps whose accuracy did not drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub rho: f64,
    pub increases: usize,
    pub n: usize,
    /// One flag per step: `acc[i] >= acc[i - 1]`.
    pub t: Vec<bool>,
}

impl RhoReport {
    /// Exact comparison of the rational `increases / n`.
    pub fn cmp_rho(&self, other: &RhoReport) -> Ordering {
        (self.increases * other.n).cmp(&(other.increases * self.n))
    }
}

pub fn rho_from_accuracies(accuracies: &[f64]) -> Result<RhoReport, CurveError> {
    if accuracies.len() < 2 {
        return Err(CurveError::TooShort(accuracies.len()));
    }
    let t: Vec<bool> = accuracies.windows(2).map(|w| w[1] >= w[0]).collect();
    let increases = t.iter().filter(|&&x| x).count();
    let n = t.len();
    Ok(RhoReport {
        rho: increases as f64 / n as f64,
        increases,
        n,
        t,
    })
}

/// Scores the observed points of a curve; gaps are skipped.
pub fn rho_score(curve: &AccuracyCurve) -> Result<RhoReport, CurveError> {
    rho_from_accuracies(&curve.observed())
}

/// Same count of non-decreasing steps divided by the number of points
/// instead of steps, so a perfect curve of `p` points scores `(p-1)/p`.
pub fn rho_per_point(report: &RhoReport) -> f64 {
    report.increases as f64 / (report.n + 1) as f64
}

/// True when no step decreases. Curves with fewer than two observed points
/// are vacuously monotone.
pub fn is_monotone(curve: &AccuracyCurve) -> bool {
    curve.observed().windows(2).all(|w| w[1] >= w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub alpha: f64,
    pub rho_threshold: f64,
    pub qualifying: usize,
    pub total: usize,
}

/// Fraction of reports with `rho >= rho_star`.
pub fn alpha_score(reports: &[RhoReport], rho_star: f64) -> Result<AlphaReport, CurveError> {
    if reports.is_empty() {
        return Err(CurveError::NoReports);
    }
    let qualifying = reports.iter().filter(|r| r.rho >= rho_star).count();
    Ok(AlphaReport {
        alpha: qualifying as f64 / reports.len() as f64,
        rho_threshold: rho_star,
        qualifying,
        total: reports.len(),
    })
}

/// One dataset's reports, one slot per extractor column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub reports: Vec<(ExtractorKind, Option<RhoReport>)>,
}

/// Every extractor tied at the highest rho in the row.
pub fn best_extractors(row: &SummaryRow) -> Vec<ExtractorKind> {
    let scored: Vec<(ExtractorKind, &RhoReport)> = row
        .reports
        .iter()
        .filter_map(|(k, r)| r.as_ref().map(|r| (*k, r)))
        .collect();
    let Some(top) = scored.iter().map(|(_, r)| *r).max_by(|a, b| a.cmp_rho(b)) else {
        return Vec::new();
    };
    scored
        .iter()
        .filter(|(_, r)| r.cmp_rho(top) == Ordering::Equal)
        .map(|(k, _)| *k)
        .collect()
}

/// Markdown table: `Dataset | <X>_ρ | <X>_n | ... | Best`.
pub fn summary_table(rows: &[SummaryRow], kinds: &[ExtractorKind]) -> String {
    let mut out = String::from("| Dataset |");
    for k in kinds {
        let _ = write!(out, " {k}_ρ | {k}_n |");
    }
    out.push_str(" Best |\n|---|");
    for _ in kinds {
        out.push_str("---|---|");
    }
    out.push_str("---|\n");
    for row in rows {
        let _ = write!(out, "| {} |", row.dataset);
        for k in kinds {
            match row
                .reports
                .iter()
                .find(|(kind, _)| kind == k)
                .and_then(|(_, r)| r.as_ref())
            {
                Some(r) => {
                    let _ = write!(out, " {:.3} | {} |", r.rho, r.n);
                }
                None => out.push_str(" - | - |"),
            }
        }
        let best: Vec<String> = best_extractors(row)
            .iter()
            .map(|k| format!("{k}_ρ"))
            .collect();
        let _ = writeln!(out, " {} |", best.join(", "));
    }
    out
}
