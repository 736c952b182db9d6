//! The `perf-oracle` command line: config loading, command dispatch and
//! artifact layout. Exit codes: 0 success, 1 usage or fatal error, 2 partial
//! results (failed grid cells or curve points).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{fetch_dataset, load_csv, SplitSpec, TabularDataset};
use crate::extract::{ExtractorConfig, ExtractorKind, Linkage};
use crate::io::write_atomic;
use crate::learners::{ForestParams, GbtParams, MlpArch, ModelSpec, TrainConfig};
use crate::mfpredict::{
    als_fit, distance_matrix, holdout_eval, load_matrix, predict_entry, AccuracyMatrix, AlsParams,
    EvalParams, Factorization, MatrixAxis,
};
use crate::predictability::{
    alpha_score, build_curve, rho_score, summary_table, AccuracyCurve, CurveConfig, RhoReport,
    Schedule, SummaryRow,
};
use crate::rng::derive;
use crate::sweep::{detect_pattern, emit_heatmap, run_sweep, GridSpec, LearnerKind};

/// Environment variable naming the download cache directory.
pub const CACHE_ENV: &str = "PERF_ORACLE_CACHE";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Sweep(#[from] crate::sweep::SweepError),
    #[error(transparent)]
    Curve(#[from] crate::predictability::CurveError),
    #[error(transparent)]
    Mf(#[from] crate::mfpredict::MfError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(
    name = "perf-oracle",
    version,
    about = "Predictability sweeps, feature-extraction curves and accuracy-matrix completion"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "perf-oracle.toml")]
    config: PathBuf,
    /// Override the global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Pattern threshold for sweeps, or the rho threshold for `rho`.
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run hyperparameter grids and classify their heatmaps.
    Sweep,
    /// Build accuracy-vs-feature-count curves.
    Curve,
    /// Score stored curves and print the summary table.
    Rho,
    /// Accuracy-matrix factorization.
    Mf {
        #[command(subcommand)]
        command: MfCommand,
    },
    /// Download every dataset given by URL into the cache.
    Fetch,
}

#[derive(Debug, Subcommand)]
enum MfCommand {
    /// Fit the factorization and write it as JSON.
    Fit,
    /// Masked-holdout MAE/RMSE per test ratio.
    Eval,
    /// Print predictions for ROW COL label pairs.
    Predict {
        #[arg(required = true, num_args = 2.., value_names = ["ROW", "COL"])]
        pairs: Vec<String>,
    },
    /// Latent-space distance matrix as CSV and SVG.
    Dist {
        #[arg(long, default_value = "rows")]
        axis: MatrixAxis,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub path: Option<PathBuf>,
    pub url: Option<String>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_label() -> String {
    "label".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxisConfig {
    pub axis1: Vec<usize>,
    pub axis2: Vec<usize>,
}

impl Default for AxisConfig {
    fn default() -> Self {
        let g = GridSpec::standard(LearnerKind::Forest);
        Self {
            axis1: g.axis1,
            axis2: g.axis2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub learners: Vec<String>,
    pub train_ratio: f64,
    pub tau: f64,
    pub max_params: Option<usize>,
    pub forest: AxisConfig,
    pub gbt: AxisConfig,
    pub mlp: AxisConfig,
    pub mlp_train: TrainConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            learners: vec!["forest".into(), "gbt".into(), "mlp".into()],
            train_ratio: 0.33,
            tau: 0.7,
            max_params: None,
            forest: AxisConfig::default(),
            gbt: AxisConfig::default(),
            mlp: AxisConfig::default(),
            mlp_train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSection {
    pub extractors: Vec<String>,
    pub steps: usize,
    pub train_ratio: f64,
    pub probe: MlpArch,
    pub probe_train: TrainConfig,
    pub forest_trees: usize,
    pub forest_depth: usize,
    pub gbt_trees: usize,
    pub gbt_depth: usize,
    pub n_repeats: usize,
    pub linkage: Linkage,
    pub rho_star: f64,
}

impl Default for CurveSection {
    fn default() -> Self {
        let ext = ExtractorConfig::default();
        Self {
            extractors: ExtractorKind::ALL
                .iter()
                .map(|k| k.tag().to_string())
                .collect(),
            steps: 10,
            train_ratio: 0.33,
            probe: MlpArch::new(4, 128),
            probe_train: TrainConfig::default(),
            forest_trees: ext.forest.n_trees,
            forest_depth: ext.forest.max_depth,
            gbt_trees: ext.gbt.n_trees,
            gbt_depth: ext.gbt.max_depth,
            n_repeats: ext.n_repeats,
            linkage: ext.linkage,
            rho_star: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfSection {
    pub matrix: Option<PathBuf>,
    /// Swap rows and columns after loading (for files with datasets as rows).
    pub transpose: bool,
    pub k: Option<usize>,
    pub lambda: f64,
    pub epochs: usize,
    pub repeats: usize,
    pub test_ratios: Vec<f64>,
}

impl Default for MfSection {
    fn default() -> Self {
        let e = EvalParams::default();
        Self {
            matrix: None,
            transpose: false,
            k: e.als.k,
            lambda: e.als.lambda,
            epochs: e.als.epochs,
            repeats: e.repeats,
            test_ratios: e.test_ratios,
        }
    }
}

/// Parsed run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub curve: CurveSection,
    #[serde(default)]
    pub mf: MfSection,
    /// Directory the config was read from; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    fn validate(&self) -> Result<(), CliError> {
        let mut seen = std::collections::HashSet::new();
        for d in &self.datasets {
            if !seen.insert(&d.id) {
                return Err(CliError::Config(format!("duplicate dataset id `{}`", d.id)));
            }
            match (&d.path, &d.url) {
                (Some(p), None) => {
                    let full = self.resolve(p);
                    if !full.exists() {
                        return Err(CliError::Config(format!(
                            "dataset `{}`: {} does not exist",
                            d.id,
                            full.display()
                        )));
                    }
                }
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "dataset `{}` needs exactly one of `path` or `url`",
                        d.id
                    )))
                }
            }
        }
        for l in &self.sweep.learners {
            l.parse::<LearnerKind>()?;
        }
        for e in &self.curve.extractors {
            ExtractorKind::from_tag(e)
                .ok_or_else(|| CliError::Config(format!("unknown extractor `{e}`")))?;
        }
        if let Some(m) = &self.mf.matrix {
            let full = self.resolve(m);
            if !full.exists() {
                return Err(CliError::Config(format!(
                    "matrix {} does not exist",
                    full.display()
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn cache_dir(&self) -> PathBuf {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.out.join("cache"))
    }

    fn load_dataset(&self, entry: &DatasetEntry) -> Result<TabularDataset, CliError> {
        let path = match (&entry.path, &entry.url) {
            (Some(p), _) => self.resolve(p),
            (None, Some(url)) => fetch_dataset(url, self.cache_dir())?,
            (None, None) => unreachable!("validated"),
        };
        let mut ds = load_csv(&path, &entry.label)?;
        ds.id = entry.id.clone();
        Ok(ds)
    }

    fn extractors(&self) -> Vec<ExtractorKind> {
        self.curve
            .extractors
            .iter()
            .filter_map(|e| ExtractorKind::from_tag(e))
            .collect()
    }

    fn load_mf_matrix(&self) -> Result<AccuracyMatrix, CliError> {
        let path = self
            .mf
            .matrix
            .as_ref()
            .ok_or_else(|| CliError::Config("[mf] needs `matrix`".into()))?;
        let m = load_matrix(self.resolve(path))?;
        Ok(if self.mf.transpose { m.transpose() } else { m })
    }

    fn als_params(&self) -> AlsParams {
        AlsParams {
            k: self.mf.k,
            lambda: self.mf.lambda,
            epochs: self.mf.epochs,
            seed: derive(self.seed, "mf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Complete,
    Partial,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Outcome::Complete) => 0,
        Ok(Outcome::Partial) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    } else {
        cfg.out = cfg.resolve(&cfg.out.clone());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build()?;
    let tau = cli.tau;
    pool.install(|| match cli.command {
        Command::Sweep => cmd_sweep(&cfg, tau),
        Command::Curve => cmd_curve(&cfg),
        Command::Rho => cmd_rho(&cfg, tau),
        Command::Mf { command } => match command {
            MfCommand::Fit => cmd_mf_fit(&cfg),
            MfCommand::Eval => cmd_mf_eval(&cfg),
            MfCommand::Predict { pairs } => cmd_mf_predict(&cfg, &pairs),
            MfCommand::Dist { axis } => cmd_mf_dist(&cfg, axis),
        },
        Command::Fetch => cmd_fetch(&cfg),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn grid_for(cfg: &RunConfig, dataset: &str, learner: LearnerKind) -> GridSpec {
    let axes = match learner {
        LearnerKind::Forest => &cfg.sweep.forest,
        LearnerKind::Gbt => &cfg.sweep.gbt,
        LearnerKind::Mlp => &cfg.sweep.mlp,
    };
    GridSpec {
        learner,
        axis1: axes.axis1.clone(),
        axis2: axes.axis2.clone(),
        train_cfg: cfg.sweep.mlp_train,
        split: SplitSpec {
            train_ratio: cfg.sweep.train_ratio,
            seed: derive(cfg.seed, &format!("sweep/{dataset}")),
        },
        gbt: GbtParams::default(),
        max_params: cfg.sweep.max_params,
    }
}

fn cmd_sweep(cfg: &RunConfig, tau: Option<f64>) -> Result<Outcome, CliError> {
    let tau = tau.unwrap_or(cfg.sweep.tau);
    let mut verdicts =
        String::from("dataset,learner,pattern,axis1_fraction,axis2_fraction,failed_cells\n");
    let mut failed = 0;
    for entry in &cfg.datasets {
        let ds = cfg.load_dataset(entry)?;
        for name in &cfg.sweep.learners {
            let learner: LearnerKind = name.parse()?;
            eprintln!("sweep {} {}", entry.id, learner.name());
            let grid = run_sweep(&ds, &grid_for(cfg, &entry.id, learner))?;
            emit_heatmap(
                &grid,
                cfg.out.join("sweep").join(&entry.id).join(learner.name()),
            )?;
            let v = detect_pattern(&grid, tau)?;
            failed += grid.n_failed();
            verdicts.push_str(&format!(
                "{},{},{},{},{},{}\n",
                entry.id,
                learner.name(),
                v.kind,
                v.axis1_fraction,
                v.axis2_fraction,
                grid.n_failed()
            ));
        }
    }
    write(&cfg.out.join("sweep").join("verdicts.csv"), &verdicts)?;
    print!("{verdicts}");
    Ok(if failed > 0 {
        Outcome::Partial
    } else {
        Outcome::Complete
    })
}

fn curve_config(cfg: &RunConfig, dataset: &str) -> (CurveConfig, ModelSpec) {
    let c = &cfg.curve;
    let seed = derive(cfg.seed, &format!("curve/{dataset}"));
    let curve_cfg = CurveConfig {
        split: SplitSpec {
            train_ratio: c.train_ratio,
            seed,
        },
        extractor: ExtractorConfig {
            forest: ForestParams::new(c.forest_trees, c.forest_depth, derive(seed, "forest")),
            gbt: GbtParams {
                n_trees: c.gbt_trees,
                max_depth: c.gbt_depth,
                ..GbtParams::default()
            },
            n_repeats: c.n_repeats,
            linkage: c.linkage,
            seed: derive(seed, "permutation"),
        },
    };
    let probe = ModelSpec::Mlp {
        arch: c.probe,
        cfg: TrainConfig {
            seed: derive(seed, "probe"),
            ..c.probe_train
        },
    };
    (curve_cfg, probe)
}

fn curve_path(cfg: &RunConfig, dataset: &str, kind: ExtractorKind) -> PathBuf {
    cfg.out
        .join("curves")
        .join(dataset)
        .join(format!("{}.csv", kind.tag()))
}

fn cmd_curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut partial = false;
    for entry in &cfg.datasets {
        let ds = cfg.load_dataset(entry)?;
        let (curve_cfg, probe) = curve_config(cfg, &entry.id);
        for kind in cfg.extractors() {
            eprintln!("curve {} {}", entry.id, kind);
            let curve = build_curve(
                &ds,
                kind,
                &probe,
                &Schedule::Standard {
                    steps: cfg.curve.steps,
                },
                &curve_cfg,
            )?;
            partial |= curve.has_gaps();
            write(&curve_path(cfg, &entry.id, kind), &curve.to_csv_string())?;
        }
    }
    Ok(if partial {
        Outcome::Partial
    } else {
        Outcome::Complete
    })
}

#[derive(Serialize)]
struct RhoDocument {
    rho_star: f64,
    reports: BTreeMap<String, BTreeMap<String, RhoReport>>,
    alpha: BTreeMap<String, crate::predictability::AlphaReport>,
}

fn cmd_rho(cfg: &RunConfig, tau: Option<f64>) -> Result<Outcome, CliError> {
    let rho_star = tau.unwrap_or(cfg.curve.rho_star);
    let kinds = cfg.extractors();
    let mut rows = Vec::new();
    let mut per_kind: BTreeMap<String, Vec<RhoReport>> = BTreeMap::new();
    let mut reports: BTreeMap<String, BTreeMap<String, RhoReport>> = BTreeMap::new();
    for entry in &cfg.datasets {
        let mut row = SummaryRow {
            dataset: entry.id.clone(),
            reports: Vec::new(),
        };
        for &kind in &kinds {
            let path = curve_path(cfg, &entry.id, kind);
            let curve =
                AccuracyCurve::load_csv(&path, kind, entry.id.clone(), "probe").map_err(|e| {
                    CliError::Config(format!("{}: {e} (run `curve` first)", path.display()))
                })?;
            let report = rho_score(&curve).ok();
            if let Some(r) = &report {
                per_kind
                    .entry(kind.tag().into())
                    .or_default()
                    .push(r.clone());
                reports
                    .entry(entry.id.clone())
                    .or_default()
                    .insert(kind.tag().into(), r.clone());
            }
            row.reports.push((kind, report));
        }
        rows.push(row);
    }
    let mut alpha = BTreeMap::new();
    for (kind, rs) in &per_kind {
        alpha.insert(kind.clone(), alpha_score(rs, rho_star)?);
    }
    let table = summary_table(&rows, &kinds);
    let mut alpha_text = format!("\nalpha at rho* = {rho_star}\n");
    for (kind, a) in &alpha {
        alpha_text.push_str(&format!(
            "{kind}: {} ({}/{})\n",
            a.alpha, a.qualifying, a.total
        ));
    }
    let dir = cfg.out.join("rho");
    write(&dir.join("summary.md"), &format!("{table}{alpha_text}"))?;
    let doc = RhoDocument {
        rho_star,
        reports,
        alpha,
    };
    write(
        &dir.join("reports.json"),
        &serde_json::to_string_pretty(&doc)?,
    )?;
    print!("{table}{alpha_text}");
    Ok(Outcome::Complete)
}

fn mf_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.join("mf")
}

fn load_factorization(cfg: &RunConfig) -> Result<Factorization, CliError> {
    let path = mf_dir(cfg).join("factorization.json");
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Read {
        path: format!("{} (run `mf fit` first)", path.display()),
        source,
    })?;
    Ok(Factorization::from_json(&text)?)
}

fn cmd_mf_fit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let matrix = cfg.load_mf_matrix()?;
    let f = als_fit(&matrix, &cfg.als_params())?;
    write(&mf_dir(cfg).join("factorization.json"), &f.to_json()?)?;
    println!(
        "k={} epochs={} objective {} -> {}",
        f.k,
        f.epochs,
        f.objective.first().copied().unwrap_or(f64::NAN),
        f.objective.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Outcome::Complete)
}

fn cmd_mf_eval(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let matrix = cfg.load_mf_matrix()?;
    let params = EvalParams {
        test_ratios: cfg.mf.test_ratios.clone(),
        repeats: cfg.mf.repeats,
        als: cfg.als_params(),
        seed: derive(cfg.seed, "mf/holdout"),
    };
    let report = holdout_eval(&matrix, &params)?;
    let csv = report.to_csv();
    write(&mf_dir(cfg).join("eval.csv"), &csv)?;
    write(
        &mf_dir(cfg).join("eval.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    print!("{csv}");
    Ok(Outcome::Complete)
}

fn cmd_mf_predict(cfg: &RunConfig, pairs: &[String]) -> Result<Outcome, CliError> {
    if !pairs.len().is_multiple_of(2) {
        return Err(CliError::Config("predict takes ROW COL pairs".into()));
    }
    let f = load_factorization(cfg)?;
    let index = |labels: &[String], l: &str| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| crate::mfpredict::MfError::UnknownLabel(l.to_string()))
    };
    let mut out = String::from("row,col,prediction\n");
    for pair in pairs.chunks(2) {
        let i = index(&f.row_labels, &pair[0])?;
        let j = index(&f.col_labels, &pair[1])?;
        out.push_str(&format!(
            "{},{},{}\n",
            pair[0],
            pair[1],
            predict_entry(&f, i, j)?
        ));
    }
    print!("{out}");
    Ok(Outcome::Complete)
}

fn cmd_mf_dist(cfg: &RunConfig, axis: MatrixAxis) -> Result<Outcome, CliError> {
    let f = load_factorization(cfg)?;
    let d = distance_matrix(&f, axis);
    let name = match axis {
        MatrixAxis::Rows => "rows",
        MatrixAxis::Cols => "cols",
    };
    let dir = mf_dir(cfg);
    write(&dir.join(format!("distance_{name}.csv")), &d.to_csv())?;
    write(
        &dir.join(format!("distance_{name}.svg")),
        &d.to_svg(&format!("latent distance ({name})")),
    )?;
    Ok(Outcome::Complete)
}

fn cmd_fetch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cache = cfg.cache_dir();
    for entry in &cfg.datasets {
        if let Some(url) = &entry.url {
            let path = fetch_dataset(url, &cache)?;
            println!("{}\t{}", entry.id, path.display());
        }
    }
    Ok(Outcome::Complete)
}
