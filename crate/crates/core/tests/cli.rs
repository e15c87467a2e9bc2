use std::path::Path;
use std::process::Command;

use anlq::expcli::series::read_series;
use anlq::expcli::snapshot::save_snapshot;
use anlq::grid::GridSpec;
use anlq::qtensor::PhysParams;

fn anlq(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_anlq")).args(args).current_dir(cwd).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_RUN: &str = r#"
[grid]
n = 8
[phys]
a = 1.0
kappa = 1.0
[time]
dt = 0.01
t_end = 0.0
[init]
family = "random"
sigma = 0.7
"#;

#[test]
fn validate_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = anlq(&["validate", "--out", "v"], dir.path());
    assert_eq!(code, 0, "{err}");
    let report = json(&dir.path().join("v/report.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 8);
    let manifest = json(&dir.path().join("v/manifest.json"));
    assert_eq!(manifest["scenario"], "validate");
    assert_eq!(manifest["run"]["status"], "ok");
}

#[test]
fn zero_horizon_run_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL_RUN).unwrap();
    let (code, _, err) = anlq(&["run", "c.toml", "--out", "r", "--seed", "9"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("initial energy E0 = 1.000000e-2"), "{err}");
    let s = read_series(&dir.path().join("r/series.csv")).unwrap();
    assert_eq!(s.rows.len(), 1);
    assert_eq!(s.column("t").unwrap(), vec![0.0]);
    let manifest = json(&dir.path().join("r/manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["time"]["output_cadence"], 0.1);
    assert!(dir.path().join("r/snapshots/final.anlq").exists());
    assert!(dir.path().join("r/plot_series.py").exists());
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[phys]\na = 1.0\nc = 3.0\nc_star = 2.0\nkappa = 1.0\n").unwrap();
    let (code, _, err) = anlq(&["run", "bad.toml", "--out", "o"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("phys.a"), "{err}");
    std::fs::write(dir.path().join("xi.toml"), "[phys]\na = 1.0\nkappa = 1.0\nxi = 0.5\n").unwrap();
    let (code, _, err) = anlq(&["run", "xi.toml", "--out", "o"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("tumbling"), "{err}");
    std::fs::write(dir.path().join("sub.toml"), "[phys]\na = -1.0\nkappa = 1.0\n").unwrap();
    let (code, _, _) = anlq(&["run", "sub.toml", "--out", "o"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn non_finite_state_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::periodic(8).unwrap();
    let p = PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let mut st = anlq::diagnostics::random_state(&grid, 2, 1).unwrap();
    st.qhat.data_mut()[1].re = f64::NAN;
    save_snapshot(&st, &p, &dir.path().join("nan.anlq")).unwrap();
    let cfg = SMALL_RUN.replace("t_end = 0.0", "t_end = 0.05").replace("sigma = 0.7", "sigma = 0.7\nresume = \"nan.anlq\"");
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let (code, _, err) = anlq(&["run", "c.toml", "--out", "o"], dir.path());
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("step 1"), "{err}");
}

#[test]
fn linear_decay_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("lin.toml"),
        "[phys]\na = 1.0\nkappa = 1.0\n[study]\nt_min = 1.0\nt_max = 1000.0\nsamples = 41\n",
    )
    .unwrap();
    let (code, _, err) = anlq(&["linear-decay", "lin.toml", "--out", "l"], dir.path());
    assert_eq!(code, 0, "{err}");
    let fit = json(&dir.path().join("l/fit.json"));
    let q0 = &fit["q_fits"][0];
    assert_eq!(q0["k"], 0);
    assert!((q0["fit"]["alpha"].as_f64().unwrap() - 0.75).abs() < 0.02);
    assert!((q0["fit"]["beta"].as_f64().unwrap() - 1.0).abs() < 1e-3);

    let (code, out, err) =
        anlq(&["fit", "l/linear_decay.csv", "--column", "u_L2_k0", "--window", "10", "1000", "--out", "f"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("\"column\": \"u_L2_k0\""), "{out}");
    let f = json(&dir.path().join("f/fit.json"));
    assert_eq!(f["summary"]["fit"]["window"][0], 10.0);
    let (code, _, _) = anlq(&["fit", "l/linear_decay.csv", "--column", "missing", "--out", "f"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn kernel_probe_and_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.toml"),
        "[phys]\na = 1.0\nkappa = 1.0\nmu = 2.0\n[probe]\nhalf_width = 1e-4\ntimes = [1.0]\n",
    )
    .unwrap();
    let (code, _, err) = anlq(&["kernel-probe", "p.toml", "--out", "k"], dir.path());
    assert_eq!(code, 0, "{err}");
    let s = read_series(&dir.path().join("k/kernel_probe.csv")).unwrap();
    assert_eq!(s.columns, ["k2", "t", "A", "B", "C", "d"]);
    assert_eq!(s.rows.len(), 201);
    let (code, _, err) = anlq(&["lower-bound", "p.toml", "--out", "b"], dir.path());
    assert_eq!(code, 0, "{err}");
    let r = json(&dir.path().join("b/report.json"));
    assert!(r["summary"]["orders"][0]["ratio"].as_f64().unwrap() < 10.0);
}
