//! Configuration, scenario orchestration, persistence and reports.

pub mod config;
pub mod series;
pub mod snapshot;
pub mod studies;
pub mod validate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::diagnostics::{energy_functionals, fit_decay, fit_decay_log, sup_norms};
use crate::dynamics::{build_initial, initial_energy, step_count, Stepper};
use crate::error::{Error, Result};
use crate::grid::SpectralState;
pub use config::{load_config, parse_config, ConfigError, RunConfig, Scenario};
use series::{plot_script, read_series, series_columns, series_row, SeriesWriter};
use snapshot::{load_snapshot, save_snapshot};

/// Exit status contract.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

/// One CLI invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub scenario: Scenario,
    /// Config file, or the CSV for `fit`.
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub workers: usize,
    /// `fit`: column to fit.
    pub column: Option<String>,
    /// `fit`: window `[t_lo, t_hi]`.
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// False when a scenario assertion failed.
    pub passed: bool,
    pub report: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
}

pub fn exit_code(res: &Result<Outcome>) -> i32 {
    match res {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_ASSERTION,
        Err(Error::Config(_) | Error::InvalidParams(_) | Error::InvalidGrid(_)) => EXIT_CONFIG,
        Err(Error::Blowup { .. }) => EXIT_BLOWUP,
        Err(_) => EXIT_ASSERTION,
    }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, v)?;
    Ok(())
}

fn write_manifest(inv: &Invocation, cfg: Option<&RunConfig>, extra: serde_json::Value) -> Result<PathBuf> {
    let path = inv.out_dir.join("manifest.json");
    let m = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": inv.scenario.name(),
        "input": inv.input.as_ref().map(|p| p.display().to_string()),
        "seed": cfg.map(|c| c.init.seed).or(inv.seed),
        "workers": inv.workers,
        "config": cfg,
        "run": extra,
    });
    write_json(&path, &m)?;
    Ok(path)
}

fn resolve_config(inv: &Invocation) -> Result<RunConfig> {
    let mut cfg = match &inv.input {
        Some(p) => load_config(p)?,
        None if inv.scenario == Scenario::Validate => RunConfig::default(),
        None => return Err(Error::Config(ConfigError::Invalid { key: "<config>".into(), message: "a config file is required".into() })),
    };
    if let Some(s) = inv.seed {
        cfg.init.seed = s;
    }
    cfg.scenario = Some(inv.scenario);
    Ok(cfg)
}

/// Run one scenario, writing its artifacts and manifest under `out_dir`.
pub fn dispatch(inv: &Invocation) -> Result<Outcome> {
    std::fs::create_dir_all(&inv.out_dir)?;
    if inv.scenario == Scenario::Fit {
        let o = fit_scenario(inv)?;
        write_manifest(inv, None, json!({ "column": inv.column, "window": inv.window }))?;
        return Ok(o);
    }
    let cfg = resolve_config(inv)?;
    write_manifest(inv, Some(&cfg), json!({ "status": "started" }))?;
    let res = match inv.scenario {
        Scenario::Run => run_scenario(&cfg, &inv.out_dir),
        Scenario::LinearDecay => linear_decay_scenario(&cfg, &inv.out_dir),
        Scenario::KernelProbe => kernel_probe_scenario(&cfg, &inv.out_dir),
        Scenario::LowerBound => lower_bound_scenario(&cfg, &inv.out_dir),
        Scenario::Validate => validate_scenario(&cfg, &inv.out_dir),
        Scenario::Fit => unreachable!(),
    };
    let status = match &res {
        Ok(o) => json!({ "status": if o.passed { "ok" } else { "assertion_failed" }, "summary": o.report.get("summary") }),
        Err(e) => json!({ "status": "error", "error": e.to_string() }),
    };
    write_manifest(inv, Some(&cfg), status)?;
    res
}

fn initial_state(cfg: &RunConfig) -> Result<SpectralState> {
    match &cfg.init.resume {
        Some(path) => {
            let (st, _) = load_snapshot(Path::new(path))?;
            if st.grid != cfg.grid {
                return Err(Error::InvalidGrid(format!("snapshot grid {:?} differs from config {:?}", st.grid, cfg.grid)));
            }
            Ok(st)
        }
        None => build_initial(&cfg.grid, &cfg.init.spec(), cfg.diagnostics.s),
    }
}

/// Nonlinear torus simulation with a diagnostics row every cadence and snapshots.
pub fn run_scenario(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.phys.require_supercritical()?;
    let s = cfg.diagnostics.s;
    let mut state = initial_state(cfg)?;
    let e0 = initial_energy(&state, s);
    eprintln!("initial energy E0 = {e0:.6e}");
    let t0 = state.t;
    let nsteps = step_count((cfg.time.t_end - t0).max(0.0), cfg.time.dt)?;
    let cadence = cfg.time.cadence_steps();

    let series_path = out.join(&cfg.outputs.series_path);
    let snap_dir = out.join(&cfg.outputs.snapshot_dir);
    std::fs::create_dir_all(&snap_dir)?;
    let cols = series_columns(s);
    let script = out.join(format!(
        "plot_{}.py",
        Path::new(&cfg.outputs.series_path).file_stem().and_then(|x| x.to_str()).unwrap_or("series")
    ));
    let csv_name = Path::new(&cfg.outputs.series_path).file_name().and_then(|x| x.to_str()).unwrap_or("series.csv");
    std::fs::write(&script, plot_script(csv_name, &cols))?;
    let mut sink = SeriesWriter::new(BufWriter::new(File::create(&series_path)?), &cols)?;

    let mut rows = 0usize;
    let (mut max_tr, mut max_div, mut max_rise) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    let mut last_e: Option<f64> = None;
    let mut q_series = Vec::new();
    let mut record = |st: &SpectralState, sink: &mut SeriesWriter<BufWriter<File>>| -> Result<()> {
        let r = energy_functionals(st, s, &cfg.phys)?;
        sink.push(&series_row(&r, sup_norms(st)?))?;
        sink.flush()?;
        rows += 1;
        max_tr = max_tr.max(r.trace_res);
        max_div = max_div.max(r.div_res);
        if let Some(prev) = last_e {
            max_rise = max_rise.max((r.e - prev) / prev.max(f64::MIN_POSITIVE));
        }
        last_e = Some(r.e);
        q_series.push((r.t, r.q_l2[0]));
        Ok(())
    };
    record(&state, &mut sink)?;
    let mut snapshots = Vec::new();
    if nsteps > 0 {
        let mut stepper = Stepper::new(&state, &cfg.phys, cfg.time.stepper())?;
        for k in 1..=nsteps {
            stepper.step(&mut state)?;
            if k % cadence == 0 || k == nsteps {
                record(&state, &mut sink)?;
            }
            let every = cfg.diagnostics.snapshot_every;
            if every > 0 && k % every == 0 && k != nsteps {
                let p = snap_dir.join(format!("state_{k:08}.anlq"));
                save_snapshot(&state, &cfg.phys, &p).map_err(Error::from)?;
                snapshots.push(p);
            }
        }
    }
    sink.flush()?;
    let final_snap = snap_dir.join("final.anlq");
    save_snapshot(&state, &cfg.phys, &final_snap)?;
    snapshots.push(final_snap);

    let fit = fit_decay(&q_series, None).ok();
    let report = json!({
        "summary": {
            "initial_energy": e0,
            "steps": nsteps,
            "t_final": state.t,
            "rows": rows,
            "max_trace_res": max_tr,
            "max_div_res": max_div,
            "max_relative_energy_increase": if rows > 1 { Some(max_rise) } else { None },
        },
        "q_l2_fit": fit,
        "linf_note": "Q_max and u_max are grid maxima, an L-infinity proxy exact only up to grid resolution",
    });
    let report_path = out.join(&cfg.outputs.report_path);
    write_json(&report_path, &report)?;
    let mut artifacts = vec![series_path, script, report_path];
    artifacts.extend(snapshots);
    Ok(Outcome { passed: true, report, artifacts })
}

fn write_table(path: &Path, cols: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = SeriesWriter::new(BufWriter::new(File::create(path)?), cols)?;
    for r in rows {
        w.push(&r)?;
    }
    w.flush()
}

pub fn linear_decay_scenario(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let r = studies::linear_decay_study(&cfg.study, &cfg.phys)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(cfg.study.q_orders.iter().map(|k| format!("ln_Q_L2_k{k}")));
    cols.extend(cfg.study.u_orders.iter().map(|k| format!("u_L2_k{k}")));
    let csv = out.join("linear_decay.csv");
    write_table(
        &csv,
        &cols,
        r.times.iter().enumerate().map(|(i, &t)| {
            let mut row = vec![t];
            row.extend(r.ln_q.iter().map(|c| c[i]));
            row.extend(r.u.iter().map(|c| c[i]));
            row
        }),
    )?;
    let report = json!({
        "summary": { "closed_form_rel_err": r.closed_form_rel_err },
        "q_fits": r.q_fits,
        "u_fits": r.u_fits,
    });
    let path = out.join("fit.json");
    write_json(&path, &report)?;
    Ok(Outcome { passed: true, report, artifacts: vec![csv, path] })
}

pub fn kernel_probe_scenario(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let r = studies::kernel_probe_scan(&cfg.probe, &cfg.phys)?;
    let cols: Vec<String> = ["k2", "t", "A", "B", "C", "d"].iter().map(|s| s.to_string()).collect();
    let csv = out.join("kernel_probe.csv");
    write_table(&csv, &cols, r.rows.iter().map(|x| x.to_vec()))?;
    let report = json!({ "summary": { "center": r.center }, "stats": r.stats });
    let path = out.join(&cfg.outputs.report_path);
    write_json(&path, &report)?;
    Ok(Outcome { passed: true, report, artifacts: vec![csv, path] })
}

pub fn lower_bound_scenario(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let r = studies::lower_bound_study(&cfg.study, &cfg.phys)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(cfg.study.u_orders.iter().map(|k| format!("u_L2_k{k}")));
    let csv = out.join("lower_bound.csv");
    write_table(
        &csv,
        &cols,
        r.times.iter().enumerate().map(|(i, &t)| {
            let mut row = vec![t];
            row.extend(r.u.iter().map(|c| c[i]));
            row
        }),
    )?;
    let report = json!({ "summary": { "orders": r.orders } });
    let path = out.join(&cfg.outputs.report_path);
    write_json(&path, &report)?;
    Ok(Outcome { passed: true, report, artifacts: vec![csv, path] })
}

pub fn validate_scenario(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let r = validate::validate_all(cfg.init.seed)?;
    for s in &r.suites {
        eprintln!("{} {}: {:e} ({})", if s.passed { "PASS" } else { "FAIL" }, s.name, s.metric, s.threshold);
    }
    let report = serde_json::to_value(&r)?;
    let path = out.join(&cfg.outputs.report_path);
    write_json(&path, &report)?;
    Ok(Outcome { passed: r.passed, report, artifacts: vec![path] })
}

/// Decay fit of one column of an existing series; `ln_` columns hold `log y`.
pub fn fit_scenario(inv: &Invocation) -> Result<Outcome> {
    let path = inv.input.as_ref().ok_or_else(|| {
        Error::Config(ConfigError::Invalid { key: "<csv>".into(), message: "fit needs a CSV path".into() })
    })?;
    let s = read_series(path)?;
    let name = inv.column.clone().unwrap_or_else(|| "Q_L2_k0".into());
    let t = s.column("t")?;
    let y = s.column(&name)?;
    let pts: Vec<(f64, f64)> = t.into_iter().zip(y).collect();
    let fit = if name.starts_with("ln_") { fit_decay_log(&pts, inv.window)? } else { fit_decay(&pts, inv.window)? };
    let report = json!({ "summary": { "column": name, "fit": fit }, "source": path.display().to_string() });
    let out = inv.out_dir.join("fit.json");
    write_json(&out, &report)?;
    Ok(Outcome { passed: true, report, artifacts: vec![out] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_contract() {
        let ok = Outcome { passed: true, report: json!({}), artifacts: vec![] };
        assert_eq!(exit_code(&Ok(ok.clone())), EXIT_OK);
        assert_eq!(exit_code(&Ok(Outcome { passed: false, ..ok })), EXIT_ASSERTION);
        assert_eq!(exit_code(&Err(Error::InvalidParams("x".into()))), EXIT_CONFIG);
        assert_eq!(exit_code(&Err(Error::Blowup { step: 3, t: 0.1 })), EXIT_BLOWUP);
        let cfg_err = parse_config("[phys]\nxi = 1\n").unwrap_err();
        assert_eq!(exit_code(&Err(cfg_err.into())), EXIT_CONFIG);
    }
}
