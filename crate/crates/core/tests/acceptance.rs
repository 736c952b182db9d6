//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances and time limits are pinned below.

mod common;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array2;
use perf_oracle::extract::ExtractorKind;
use perf_oracle::extract::{
    pca_fit, pca_transform, permutation_importance, spearman_matrix, ward_cluster,
    CorrelationMatrix,
};
use perf_oracle::learners::{
    accuracy, fit_forest, split_gain, ForestParams, LayerGrad, MlpArch, MlpModel,
};
use perf_oracle::mfpredict::{
    als_fit, holdout_eval, load_matrix, predict_entry, AlsParams, EvalParams,
};
use perf_oracle::predictability::{is_monotone, rho_score, AccuracyCurve, CurvePoint};
use perf_oracle::sweep::{detect_pattern, HeatmapGrid, PatternKind};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use common::*;

const SPLIT_GAIN_TOL: f64 = 1e-10;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-5;
/// Denominator floor for the relative gradient error, so parameters whose
/// true gradient is ~0 are judged on absolute error.
const GRAD_FLOOR: f64 = 1e-6;
/// Inputs putting any hidden pre-activation this close to 0 are redrawn.
const KINK_MARGIN: f64 = 1e-4;
const SPEARMAN_TOL: f64 = 1e-12;
const WARD_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-10;
const DISTANCE_TOL: f64 = 1e-8;
const EIGEN_TOL: f64 = 1e-8;
const ALS_RMSE_TOL: f64 = 1e-4;
const MAE_AT_12: f64 = 0.05;
const MAE_UP_TO_70: f64 = 0.10;
const PATTERN_TAU: f64 = 0.7;
const PERM_TOL: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() {
    let checks: [(&str, Duration, Check); 12] = [
        ("rho oracle equivalence", Duration::from_secs(1), rho_oracle),
        (
            "split-gain oracle",
            Duration::from_secs(5),
            split_gain_oracle,
        ),
        (
            "mlp gradient check",
            Duration::from_secs(10),
            gradient_check,
        ),
        ("spearman oracle", Duration::from_secs(30), spearman_oracle),
        ("ward oracle", Duration::from_secs(30), ward_oracle),
        ("pca properties", Duration::from_secs(30), pca_properties),
        ("als recovery", Duration::from_secs(5), als_recovery),
        ("holdout mae analog", Duration::from_secs(30), holdout_mae),
        ("pattern detector", Duration::from_secs(5), pattern_detector),
        ("end-to-end fixture", Duration::from_secs(300), end_to_end),
        (
            "permutation importance sanity",
            Duration::from_secs(30),
            permutation_sanity,
        ),
        (
            "matrix round-trip",
            Duration::from_secs(30),
            matrix_round_trip,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| outcome(false, "panicked"));
        let took = start.elapsed();
        let in_time = took <= *limit;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        let detail = if in_time {
            result.detail
        } else {
            format!("{}; over time limit {:?}", result.detail, limit)
        };
        println!(
            "{} {:>2} {name}: {detail} ({:.3}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
        std::io::stdout().flush().ok();
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn rho_oracle() -> Outcome {
    let mut r = rng(1);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let len = r.random_range(2..=20);
        let levels = r.random_range(2..=6);
        // Coarse levels force ties, which must count as increases.
        let acc: Vec<f64> = (0..len)
            .map(|_| r.random_range(0..levels) as f64 / (levels - 1) as f64)
            .collect();
        let points = acc
            .iter()
            .enumerate()
            .map(|(i, &a)| CurvePoint {
                k: i + 1,
                accuracy: Some(a),
            })
            .collect();
        let curve = AccuracyCurve::new(ExtractorKind::Pca, "r", "m", points).unwrap();
        let report = rho_score(&curve).unwrap();
        let (inc, pairs) = brute_rho(&acc);
        let exact =
            report.increases == inc && report.n == pairs && report.rho == inc as f64 / pairs as f64;
        let monotone_agrees = is_monotone(&curve) == (report.rho == 1.0);
        if !exact || !monotone_agrees {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches over 1000 curves"),
    )
}

fn split_gain_oracle() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..2000 {
        let n = r.random_range(2..=6);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (r.random_range(-2.0..2.0), r.random_range(0.01..1.0)))
            .collect();
        let lambda = r.random_range(0.0..2.0);
        let gamma = r.random_range(0.0..1.0);
        let parent = structure_score(std::slice::from_ref(&pts), lambda, gamma);
        // Every two-sided partition of the points is a candidate split.
        for mask in 1..(1u32 << n) - 1 {
            let (left, right): (Vec<_>, Vec<_>) = (0..n).partition(|&i| mask & (1 << i) != 0);
            let left: Vec<(f64, f64)> = left.into_iter().map(|i| pts[i]).collect();
            let right: Vec<(f64, f64)> = right.into_iter().map(|i| pts[i]).collect();
            let children = structure_score(&[left.clone(), right.clone()], lambda, gamma);
            let direct = parent - children;
            let sum = |s: &[(f64, f64)]| {
                (
                    s.iter().map(|p| p.0).sum::<f64>(),
                    s.iter().map(|p| p.1).sum::<f64>(),
                )
            };
            let (gl, hl) = sum(&left);
            let (gr, hr) = sum(&right);
            let gain = split_gain(gl, hl, gr, hr, lambda, gamma);
            worst = worst.max((gain - direct).abs());
            checked += 1;
        }
    }
    outcome(
        worst <= SPLIT_GAIN_TOL,
        format!("{checked} splits, max |diff| {worst:.2e}"),
    )
}

fn gradient_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut redraws = 0;
    for classes in [2usize, 3] {
        let mut r = rng(3 + classes as u64);
        for draw in 0..100u64 {
            // A generic point: every weight and bias drawn at random.
            let mut model = MlpModel::init(5, classes, MlpArch::new(2, 8), draw).unwrap();
            let params: Vec<f64> = (0..model.n_params())
                .map(|_| 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut r))
                .collect();
            model.set_params_flat(&params).unwrap();
            let (x, y) = loop {
                let x = Array2::from_shape_simple_fn((12, 5), || StandardNormal.sample(&mut r));
                let y: Vec<usize> = (0..12).map(|_| r.random_range(0..classes)).collect();
                if hidden_margin(&model, x.view()) > KINK_MARGIN {
                    break (x, y);
                }
                redraws += 1;
            };
            let (_, grads) = model.loss_and_gradients(x.view(), &y);
            let analytic = LayerGrad::flatten(&grads);
            let numeric = numeric_gradient(&model, x.view(), &y, GRAD_STEP);
            for (a, n) in analytic.iter().zip(&numeric) {
                let rel = (a - n).abs() / a.abs().max(n.abs()).max(GRAD_FLOOR);
                worst = worst.max(rel);
            }
        }
    }
    outcome(
        worst < GRAD_REL_TOL,
        format!("100 draws per head (sigmoid, softmax), {redraws} inputs redrawn near a ReLU kink, max relative error {worst:.2e}"),
    )
}

fn spearman_oracle() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut tied_pairs = 0;
    for trial in 0..500 {
        let n = r.random_range(2..=30);
        let continuous = trial % 4 == 0;
        let a = column(&mut r, n, continuous);
        let b = column(&mut r, n, continuous);
        if has_ties(&a) || has_ties(&b) {
            tied_pairs += 1;
        }
        let x = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { a[i] } else { b[i] });
        let got = spearman_matrix(x.view()).unwrap().get(0, 1);
        worst = worst.max((got - spearman_direct(&a, &b)).abs());
    }
    outcome(
        worst <= SPEARMAN_TOL,
        format!("500 pairs ({tied_pairs} with ties), max |diff| {worst:.2e}"),
    )
}

/// Uniform draws, or a handful of integer levels to force ties; a single
/// level gives a constant column.
fn column(r: &mut impl Rng, n: usize, continuous: bool) -> Vec<f64> {
    if continuous {
        (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
    } else {
        let levels = r.random_range(1..=5);
        (0..n).map(|_| r.random_range(0..levels) as f64).collect()
    }
}

fn has_ties(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.windows(2).any(|w| w[0] == w[1])
}

fn ward_oracle() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut order_mismatch = 0;
    for trial in 0..100 {
        let d = 2 + trial % 5;
        let data = Array2::from_shape_simple_fn((d + 6, d), || StandardNormal.sample(&mut r));
        let corr = pearson_matrix(&data);
        let dend = ward_cluster(&CorrelationMatrix::new(corr.clone()).unwrap()).unwrap();
        let oracle = ward_exhaustive(&corr);
        for (m, (a, b, h)) in dend.merges.iter().zip(&oracle) {
            if (m.a.min(m.b), m.a.max(m.b)) != (*a, *b) {
                order_mismatch += 1;
            }
            worst = worst.max((m.height - h).abs());
        }
    }
    outcome(
        order_mismatch == 0 && worst <= WARD_TOL,
        format!(
            "100 matrices d<=6, {order_mismatch} merge mismatches, max height diff {worst:.2e}"
        ),
    )
}

fn pca_properties() -> Outcome {
    let mut r = rng(6);
    let (mut ortho, mut dist, mut eig) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = Array2::from_shape_simple_fn((5, 4), || StandardNormal.sample(&mut r));
        let proj = pca_fit(x.view(), 4).unwrap();
        let c = &proj.components;
        let gram = c.dot(&c.t());
        for ((i, j), v) in gram.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((v - target).abs());
        }
        let z = pca_transform(&proj, x.view()).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let dx = (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt();
                let dz = (&z.row(i) - &z.row(j)).mapv(|v| v * v).sum().sqrt();
                dist = dist.max((dx - dz).abs());
            }
        }
        let brute = jacobi_eigenvalues(&covariance(&x));
        for (a, b) in proj.explained_variance().iter().zip(&brute) {
            eig = eig.max((a - b).abs());
        }
    }
    // A wider matrix with k < d for orthonormality on a proper subspace.
    let x = Array2::from_shape_simple_fn((40, 9), || StandardNormal.sample(&mut r));
    let proj = pca_fit(x.view(), 3).unwrap();
    let gram = proj.components.dot(&proj.components.t());
    for ((i, j), v) in gram.indexed_iter() {
        ortho = ortho.max((v - if i == j { 1.0 } else { 0.0 }).abs());
    }
    outcome(
        ortho < ORTHO_TOL && dist < DISTANCE_TOL && eig < EIGEN_TOL,
        format!("orthonormality {ortho:.1e}, distance {dist:.1e}, eigenvalues {eig:.1e}"),
    )
}

fn als_recovery() -> Outcome {
    let values = low_rank(20, 15, 3, 7);
    let matrix = dense_matrix(values.clone());
    let params = AlsParams {
        k: Some(3),
        lambda: 1e-9,
        epochs: 1000,
        seed: 7,
    };
    let f = als_fit(&matrix, &params).unwrap();
    let mut sq = 0.0;
    for ((i, j), v) in values.indexed_iter() {
        sq += (predict_entry(&f, i, j).unwrap() - v).powi(2);
    }
    let rmse = (sq / values.len() as f64).sqrt();
    let rises = f
        .objective
        .windows(2)
        .filter(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300)
        .count();
    outcome(
        rmse < ALS_RMSE_TOL && rises == 0 && f.objective.len() <= 1001,
        format!(
            "rmse {rmse:.2e}, {rises} objective increases over {} epochs",
            f.objective.len() - 1
        ),
    )
}

fn holdout_mae() -> Outcome {
    let mut r = rng(8);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let values = low_rank(20, 15, 3, 8).mapv(|v| (v + noise.sample(&mut r)).clamp(0.0, 1.0));
    let params = EvalParams {
        test_ratios: vec![0.12, 0.3, 0.5, 0.7],
        repeats: 5,
        als: AlsParams {
            k: Some(3),
            lambda: 0.5,
            epochs: 1000,
            seed: 8,
        },
        seed: 8,
    };
    let report = holdout_eval(&dense_matrix(values), &params).unwrap();
    let at12 = report.rows[0].mae;
    let max = report.rows.iter().map(|row| row.mae).fold(0.0, f64::max);
    let maes: Vec<String> = report
        .rows
        .iter()
        .map(|row| format!("{}:{:.4}", row.test_ratio, row.mae))
        .collect();
    outcome(
        at12 <= MAE_AT_12 && max <= MAE_UP_TO_70,
        format!("mae {}", maes.join(" ")),
    )
}

#[allow(clippy::needless_range_loop)]
fn brute_fraction(values: &[Vec<f64>], along_cols: bool) -> f64 {
    let (rows, cols) = (values.len(), values[0].len());
    let (lanes, len) = if along_cols {
        (rows, cols)
    } else {
        (cols, rows)
    };
    let mut total = 0.0;
    for lane in 0..lanes {
        let mut up = 0;
        for s in 1..len {
            let (prev, next) = if along_cols {
                (values[lane][s - 1], values[lane][s])
            } else {
                (values[s - 1][lane], values[s][lane])
            };
            if next >= prev {
                up += 1;
            }
        }
        total += up as f64 / (len - 1) as f64;
    }
    total / lanes as f64
}

fn pattern_detector() -> Outcome {
    let monotone: Vec<Vec<f64>> = (0..9)
        .map(|r| {
            (0..6)
                .map(|c| 0.5 + 0.03 * r as f64 + 0.05 * c as f64)
                .collect()
        })
        .collect();
    let grid = HeatmapGrid::from_values(monotone);
    let up = detect_pattern(&grid, PATTERN_TAU).unwrap().kind;
    let down = detect_pattern(&grid.map(|a| 1.0 - a), PATTERN_TAU)
        .unwrap()
        .kind;
    let mut none = 0;
    let mut recount_ok = true;
    for trial in 0..100u64 {
        let mut r = rng(900 + trial);
        let values: Vec<Vec<f64>> = (0..9)
            .map(|_| (0..6).map(|_| r.random_range(0.0..1.0)).collect())
            .collect();
        let v = detect_pattern(&HeatmapGrid::from_values(values.clone()), PATTERN_TAU).unwrap();
        recount_ok &= v.axis1_fraction == brute_fraction(&values, true)
            && v.axis2_fraction == brute_fraction(&values, false);
        if v.kind == PatternKind::NoPattern {
            none += 1;
        }
    }
    outcome(
        up == PatternKind::Expected && down == PatternKind::Unexpected && none >= 95 && recount_ok,
        format!("monotone {up}, negated {down}, uniform none {none}/100, recount ok {recount_ok}"),
    )
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn pipeline(out: &Path, jobs: usize) -> Result<Duration, String> {
    let config = fixture("e2e.toml");
    let start = Instant::now();
    let steps: [&[&str]; 5] = [
        &["sweep"],
        &["curve"],
        &["rho"],
        &["mf", "fit"],
        &["mf", "eval"],
    ];
    for step in steps {
        let mut args: Vec<String> = vec!["perf-oracle".into()];
        args.extend(step.iter().map(|s| s.to_string()));
        args.extend([
            "--config".into(),
            config.display().to_string(),
            "--out".into(),
            out.display().to_string(),
            "--jobs".into(),
            jobs.to_string(),
        ]);
        let code = perf_oracle::cli::run(&args);
        if code != 0 {
            return Err(format!("`{}` exited {code}", step.join(" ")));
        }
    }
    Ok(start.elapsed())
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let runs = [("a", 1), ("b", 1), ("c", 4)];
    let mut snaps = Vec::new();
    let mut times = Vec::new();
    for (name, jobs) in runs {
        let out = tmp.path().join(name);
        match pipeline(&out, jobs) {
            Ok(t) => times.push(t),
            Err(e) => return outcome(false, e),
        }
        snaps.push(snapshot(&out));
    }
    let files = snaps[0].len();
    let rerun_same = snaps[0] == snaps[1];
    let jobs_same = snaps[0] == snaps[2];
    let slowest = times.iter().max().unwrap().as_secs_f64();
    outcome(
        files > 0 && rerun_same && jobs_same && slowest < 300.0,
        format!(
            "{files} files, rerun identical {rerun_same}, jobs 1 vs 4 identical {jobs_same}, slowest pipeline {slowest:.1}s"
        ),
    )
}

fn permutation_sanity() -> Outcome {
    const LABEL_COL: usize = 3;
    const CONST_COL: usize = 1;
    let mut r = rng(11);
    let n = 600;
    let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Array2::from_shape_fn((n, 6), |(i, j)| match j {
        LABEL_COL => y[i] as f64,
        CONST_COL => 3.0,
        _ => StandardNormal.sample(&mut r),
    });
    let ds = dataset("perm", x, y);
    let (train, valid) = perf_oracle::data::train_test_split(
        &ds,
        perf_oracle::data::SplitSpec::new(0.67, 11).unwrap(),
    )
    .unwrap();
    let model = fit_forest(&train, &ForestParams::new(100, 12, 11)).unwrap();
    let baseline = accuracy(&model, &valid).unwrap();
    let ranking = permutation_importance(&model, &valid, 5, 11).unwrap();
    let expected = baseline - 1.0 / ds.n_classes() as f64;
    let score = ranking.scores[LABEL_COL];
    let constant = ranking.scores[CONST_COL];
    outcome(
        ranking.order[0] == LABEL_COL && (score - expected).abs() <= PERM_TOL && constant == 0.0,
        format!(
            "top {}, label score {score:.4} vs {expected:.4}, constant score {constant}",
            ranking.order[0]
        ),
    )
}

fn matrix_round_trip() -> Outcome {
    let path = fixture("accuracy_matrix.csv");
    let m = load_matrix(&path).unwrap();
    let expected: [(&str, [f64; 7]); 4] = [
        (
            "14",
            [
                0.195455, 0.813636, 0.821212, 0.710606, 0.757576, 0.828788, 0.830303,
            ],
        ),
        (
            "44",
            [
                0.85451, 0.929559, 0.931534, 0.895326, 0.923634, 0.939434, 0.946675,
            ],
        ),
        (
            "60",
            [0.38, 0.853939, 0.858182, 0.778182, 0.788485, 0.829091, 0.86],
        ),
        (
            "41053",
            [
                0.904639, 0.898196, 0.899485, 0.916237, 0.926546, 0.916237, 0.923969,
            ],
        ),
    ];
    let mut exact = m.n_rows() == 48 && m.n_cols() == 7 && m.n_observed() == 48 * 7;
    for (label, row) in &expected {
        let i = m.row_index(label).unwrap();
        exact &= row.iter().enumerate().all(|(j, &v)| m.get(i, j) == Some(v));
    }
    // Blank a few cells in a copy and reload.
    let text = std::fs::read_to_string(&path).unwrap();
    let blanked: Vec<(usize, usize)> = vec![(0, 2), (5, 0), (47, 6), (20, 3)];
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    for &(i, j) in &blanked {
        let mut fields: Vec<&str> = lines[i + 1].split(',').collect();
        fields[j + 1] = "";
        lines[i + 1] = fields.join(",");
    }
    let tmp = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(tmp.path(), lines.join("\n") + "\n").unwrap();
    let holes = load_matrix(tmp.path()).unwrap();
    let mut blanks_ok = holes.n_observed() == 48 * 7 - blanked.len();
    for i in 0..48 {
        for j in 0..7 {
            let want = if blanked.contains(&(i, j)) {
                None
            } else {
                m.get(i, j)
            };
            blanks_ok &= holes.get(i, j) == want && holes.observed[[i, j]] == want.is_some();
        }
    }
    outcome(
        exact && blanks_ok,
        format!("reference rows exact {exact}, blanks unobserved {blanks_ok}"),
    )
}
