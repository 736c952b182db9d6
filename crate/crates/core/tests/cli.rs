use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_perf-oracle");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    fs::read_to_string(fixture("golden").join(name)).unwrap()
}

fn perf_oracle(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(dir.join("run.toml"))
        .env("PERF_ORACLE_CACHE", dir.join("cache"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Temp dir with a copy of the bundled dataset and the given config body.
fn workspace(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("synthetic.csv"), dir.path().join("synthetic.csv")).unwrap();
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

const SMALL_SWEEP: &str = r#"
seed = 11
[[dataset]]
id = "synthetic"
path = "synthetic.csv"
[sweep]
learners = ["forest", "mlp"]
[sweep.forest]
axis1 = [1, 3]
axis2 = [2, 8]
[sweep.mlp]
axis1 = [1, 2]
axis2 = [2, 4]
[sweep.mlp_train]
epochs = 3
"#;

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&Command::new(BIN).arg("--help").output().unwrap()), 0);
    assert_eq!(
        code(&Command::new(BIN).arg("frobnicate").output().unwrap()),
        1
    );
    assert_eq!(
        code(
            &Command::new(BIN)
                .args(["sweep", "--config", "/nonexistent/run.toml"])
                .output()
                .unwrap()
        ),
        1
    );
    let dir = workspace("[sweep]\nlearners = [\"svm\"]\n");
    let o = perf_oracle(dir.path(), &["sweep"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("svm"));
    assert_eq!(code(&perf_oracle(dir.path(), &["sweep", "--jobs", "0"])), 1);
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = workspace(SMALL_SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        code(&perf_oracle(
            dir.path(),
            &["sweep", "--out", a.to_str().unwrap(), "--jobs", "1"]
        )),
        0
    );
    assert_eq!(
        code(&perf_oracle(
            dir.path(),
            &["sweep", "--out", b.to_str().unwrap(), "--jobs", "3"]
        )),
        0
    );
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    assert_eq!(ta.len(), 5);
    assert_eq!(ta, tb);
    assert_eq!(
        fs::read_to_string(a.join("sweep/verdicts.csv")).unwrap(),
        golden("verdicts.csv")
    );
}

#[test]
fn over_budget_cells_make_a_partial_run() {
    // One hidden layer of 2 units on 20 features needs 45 params.
    let cfg = SMALL_SWEEP.replace(
        "learners = [\"forest\", \"mlp\"]",
        "learners = [\"mlp\"]\nmax_params = 60",
    );
    let dir = workspace(&cfg);
    let out = dir.path().join("out");
    let o = perf_oracle(dir.path(), &["sweep", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let heat = fs::read_to_string(out.join("sweep/synthetic/mlp/grid.csv")).unwrap();
    assert!(heat.contains("null"));
}

const RANK_ONE: &str = r#"
seed = 5
[mf]
matrix = "rank1.csv"
k = 1
lambda = 1e-9
epochs = 2000
"#;

fn rank_one_matrix() -> (String, Vec<Vec<f64>>) {
    let u = [0.9, 0.7, 0.5, 0.8];
    let v = [0.6, 0.9, 0.4, 0.7, 0.5];
    let values: Vec<Vec<f64>> = u
        .iter()
        .map(|a| v.iter().map(|b| a * b).collect())
        .collect();
    let mut text = String::from("ID,c0,c1,c2,c3,c4\n");
    for (i, row) in values.iter().enumerate() {
        text.push_str(&format!("r{i}"));
        for x in row {
            text.push_str(&format!(",{x}"));
        }
        text.push('\n');
    }
    (text, values)
}

#[test]
fn fit_then_predict_reproduces_a_rank_one_matrix() {
    let dir = workspace(RANK_ONE);
    let (text, values) = rank_one_matrix();
    fs::write(dir.path().join("rank1.csv"), text).unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(
        code(&perf_oracle(dir.path(), &["mf", "fit", "--out", out])),
        0
    );
    let o = perf_oracle(
        dir.path(),
        &[
            "mf", "predict", "--out", out, "r0", "c0", "r2", "c3", "r3", "c4",
        ],
    );
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "row,col,prediction");
    for (line, (i, j)) in lines[1..].iter().zip([(0, 0), (2, 3), (3, 4)]) {
        let p: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(
            (p - values[i][j]).abs() < 1e-4,
            "{line} vs {}",
            values[i][j]
        );
    }
    let o = perf_oracle(dir.path(), &["mf", "predict", "--out", out, "r9", "c0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown-label"));
    assert_eq!(
        code(&perf_oracle(
            dir.path(),
            &["mf", "dist", "--axis", "cols", "--out", out]
        )),
        0
    );
    assert!(Path::new(out).join("mf/distance_cols.svg").exists());
}

#[test]
fn rho_summary_matches_golden() {
    let dir = workspace(
        "[[dataset]]\nid = \"synthetic\"\npath = \"synthetic.csv\"\n[curve]\nextractors = [\"RF\", \"XGB\"]\nrho_star = 0.6\n",
    );
    let curves = dir.path().join("out/curves/synthetic");
    fs::create_dir_all(&curves).unwrap();
    fs::write(
        curves.join("RF.csv"),
        "k,accuracy\n2,0.5\n4,0.6\n6,0.55\n8,0.7\n",
    )
    .unwrap();
    fs::write(
        curves.join("XGB.csv"),
        "k,accuracy\n2,0.5\n4,\n6,0.6\n8,0.6\n",
    )
    .unwrap();
    let o = perf_oracle(dir.path(), &["rho"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("out/rho/summary.md")).unwrap();
    assert_eq!(summary, golden("rho_summary.md"));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), summary);
}

#[test]
fn rho_without_curves_is_fatal() {
    let dir = workspace("[[dataset]]\nid = \"synthetic\"\npath = \"synthetic.csv\"\n");
    assert_eq!(code(&perf_oracle(dir.path(), &["rho"])), 1);
}
