//! TOML run configuration.
//!
//! ```toml
//! scenario = "run"            # optional; the CLI subcommand wins
//!
//! [grid]
//! n = 32                      # default 32
//! box_length = 6.283185307179586
//! dealias = "two_thirds"      # two_thirds | half | none
//!
//! [phys]                      # a and kappa, or c_star and alpha2, or both if consistent
//! a = 1.0
//! b = 1.0
//! c = 1.0
//! kappa = 1.0
//! lambda = 1.0
//! mu = 1.0
//! gamma = 1.0
//!
//! [time]
//! dt = 0.005
//! t_end = 1.0
//! output_cadence = 0.1
//!
//! [init]
//! family = "gaussian"         # gaussian | random | single_mode
//! energy = 0.01               # or amplitude = ...
//! sigma = 1.0
//! seed = 0
//! resume = "snap.anlq"        # optional snapshot to continue from
//!
//! [diagnostics]
//! s = 2
//! snapshot_every = 0          # steps; 0 writes only the final snapshot
//!
//! [study]                     # linear-decay, lower-bound
//! [probe]                     # kernel-probe
//!
//! [outputs]
//! series_path = "series.csv"
//! snapshot_dir = "snapshots"
//! report_path = "report.json"
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{InitFamily, InitSpec, Scheme, StepperConfig};
use crate::grid::{DealiasRule, GridSpec};
use crate::qtensor::PhysParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid config key `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("unsupported config key `{key}`: {message}")]
    OutOfScope { key: String, message: String },

    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Run,
    LinearDecay,
    KernelProbe,
    LowerBound,
    Validate,
    Fit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Run => "run",
            Scenario::LinearDecay => "linear-decay",
            Scenario::KernelProbe => "kernel-probe",
            Scenario::LowerBound => "lower-bound",
            Scenario::Validate => "validate",
            Scenario::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: Option<Scenario>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    phys: RawPhys,
    #[serde(default)]
    time: TimeConfig,
    #[serde(default)]
    init: InitConfig,
    #[serde(default)]
    diagnostics: DiagnosticsConfig,
    #[serde(default)]
    study: StudyConfig,
    #[serde(default)]
    probe: ProbeConfig,
    #[serde(default)]
    outputs: OutputConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    box_length: Option<f64>,
    dealias: Option<DealiasRule>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhys {
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    c_star: Option<f64>,
    kappa: Option<f64>,
    alpha2: Option<f64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Time between diagnostics rows.
    pub output_cadence: f64,
    pub scheme: Scheme,
    pub reproject_every: usize,
    pub nonlinear: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { dt: 5e-3, t_end: 1.0, output_cadence: 0.1, scheme: Scheme::IfRk4, reproject_every: 1, nonlinear: true }
    }
}

impl TimeConfig {
    pub fn stepper(&self) -> StepperConfig {
        StepperConfig { dt: self.dt, scheme: self.scheme, reproject_every: self.reproject_every, nonlinear: self.nonlinear }
    }

    /// Steps between diagnostics rows (at least 1).
    pub fn cadence_steps(&self) -> usize {
        ((self.output_cadence / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub family: InitFamily,
    pub energy: Option<f64>,
    pub amplitude: Option<f64>,
    pub sigma: f64,
    pub seed: u64,
    pub resume: Option<String>,
}

impl Default for InitConfig {
    fn default() -> Self {
        let d = InitSpec::default();
        Self { family: d.family, energy: None, amplitude: None, sigma: d.sigma, seed: d.seed, resume: None }
    }
}

impl InitConfig {
    pub fn spec(&self) -> InitSpec {
        InitSpec { family: self.family, energy: self.energy, amplitude: self.amplitude, sigma: self.sigma, seed: self.seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Sobolev index of the energy functionals.
    pub s: usize,
    /// Steps between snapshots; 0 writes only the final state.
    pub snapshot_every: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { s: 2, snapshot_every: 0 }
    }
}

/// Whole-space linear studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub t_min: f64,
    pub t_max: f64,
    /// Log-spaced sample count on `[t_min, t_max]`.
    pub samples: usize,
    /// Gaussian width of `Q̂₀`; default `1/√(2Γ)`.
    pub q_sigma: Option<f64>,
    /// Gaussian width of `û₀`; default `1/√(2μ)`.
    pub u_sigma: Option<f64>,
    pub q_bar: f64,
    pub u_bar: f64,
    pub q_orders: Vec<u32>,
    pub u_orders: Vec<u32>,
    pub tol: f64,
    /// Fit window; default is the last decade.
    pub window: Option<[f64; 2]>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            t_max: 1e3,
            samples: 61,
            q_sigma: None,
            u_sigma: None,
            q_bar: 1.0,
            u_bar: 1.0,
            q_orders: vec![0, 1, 2],
            u_orders: vec![0, 1],
            tol: 1e-10,
            window: None,
        }
    }
}

impl StudyConfig {
    pub fn times(&self) -> Vec<f64> {
        let (lo, hi) = (self.t_min.ln(), self.t_max.ln());
        let m = self.samples.max(2) - 1;
        let mut t: Vec<f64> = (0..=m).map(|i| (lo + (hi - lo) * i as f64 / m as f64).exp()).collect();
        t[0] = self.t_min;
        t[m] = self.t_max;
        t
    }
}

/// Resonance scan of the `B` kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Scan centre; default is the resonance `|ξ|²`, or 1 when there is none.
    pub center: Option<f64>,
    pub half_width: f64,
    pub spacing: f64,
    pub times: Vec<f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { center: None, half_width: 1e-3, spacing: 1e-6, times: vec![0.1, 1.0, 10.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub series_path: String,
    pub snapshot_dir: String,
    pub report_path: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { series_path: "series.csv".into(), snapshot_dir: "snapshots".into(), report_path: "report.json".into() }
    }
}

/// Fully resolved configuration; serializes to the manifest form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub grid: GridSpec,
    pub phys: PhysParams,
    pub time: TimeConfig,
    pub init: InitConfig,
    pub diagnostics: DiagnosticsConfig,
    pub study: StudyConfig,
    pub probe: ProbeConfig,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("[phys]\na = 1.0\nkappa = 1.0\n").expect("default config is valid")
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300)
}

fn resolve_phys(raw: &RawPhys) -> Result<PhysParams, ConfigError> {
    let one = |v: Option<f64>| v.unwrap_or(1.0);
    let c = one(raw.c);
    let a = match (raw.a, raw.c_star) {
        (Some(a), Some(cs)) if !close(a, (c - cs) / 2.0) => {
            return Err(invalid("phys.a", format!("a = {a} is inconsistent with (c − c_star)/2 = {}", (c - cs) / 2.0)))
        }
        (Some(a), _) => a,
        (None, Some(cs)) => (c - cs) / 2.0,
        (None, None) => return Err(invalid("phys.a", "missing: give a or c_star")),
    };
    let kappa = match (raw.kappa, raw.alpha2) {
        (Some(k), Some(al)) if !close(k, al * c * c) => {
            return Err(invalid("phys.kappa", format!("kappa = {k} is inconsistent with alpha2·c² = {}", al * c * c)))
        }
        (Some(k), _) => k,
        (None, Some(al)) => al * c * c,
        (None, None) => return Err(invalid("phys.kappa", "missing: give kappa or alpha2")),
    };
    let mut p = PhysParams {
        a,
        b: one(raw.b),
        c,
        c_star: c - 2.0 * a,
        kappa,
        lambda: one(raw.lambda),
        mu: one(raw.mu),
        gamma: one(raw.gamma),
    };
    if let Some(cs) = raw.c_star {
        p.c_star = cs;
    }
    p.validate().map_err(|e| invalid("phys", e.to_string()))?;
    Ok(p)
}

/// Parse and validate a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse { line, column, message: e.message().to_string() }
    })?;
    if let Some(phys) = value.get("phys").and_then(|v| v.as_table()) {
        if phys.contains_key("xi") {
            return Err(ConfigError::OutOfScope {
                key: "phys.xi".into(),
                message: "the tumbling parameter is out of scope; only the corotational system (xi = 0) is modelled"
                    .into(),
            });
        }
    }
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse { line, column, message: e.message().to_string() }
    })?;

    let g = &raw.grid;
    let grid = GridSpec::new(
        g.n.unwrap_or(32),
        g.box_length.unwrap_or(2.0 * std::f64::consts::PI),
        g.dealias.unwrap_or(DealiasRule::TwoThirds),
    )
    .map_err(|e| invalid("grid", e.to_string()))?;
    let phys = resolve_phys(&raw.phys)?;

    let t = &raw.time;
    if !(t.dt.is_finite() && t.dt > 0.0) {
        return Err(invalid("time.dt", format!("must be positive, got {}", t.dt)));
    }
    if !(t.t_end.is_finite() && t.t_end >= 0.0) {
        return Err(invalid("time.t_end", format!("must be nonnegative, got {}", t.t_end)));
    }
    if !(t.output_cadence.is_finite() && t.output_cadence > 0.0) {
        return Err(invalid("time.output_cadence", format!("must be positive, got {}", t.output_cadence)));
    }
    let i = &raw.init;
    if !(i.sigma.is_finite() && i.sigma > 0.0) {
        return Err(invalid("init.sigma", format!("must be positive, got {}", i.sigma)));
    }
    if let Some(e) = i.energy.filter(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(invalid("init.energy", format!("must be nonnegative, got {e}")));
    }
    if raw.diagnostics.s > 12 {
        return Err(invalid("diagnostics.s", format!("at most 12, got {}", raw.diagnostics.s)));
    }
    let st = &raw.study;
    if !(st.t_min > 0.0 && st.t_max > st.t_min && st.t_max.is_finite()) {
        return Err(invalid("study.t_min", format!("need 0 < t_min < t_max, got [{}, {}]", st.t_min, st.t_max)));
    }
    if st.samples < 4 {
        return Err(invalid("study.samples", format!("need at least 4, got {}", st.samples)));
    }
    if !(st.tol > 0.0) {
        return Err(invalid("study.tol", format!("must be positive, got {}", st.tol)));
    }
    let pr = &raw.probe;
    if !(pr.spacing > 0.0 && pr.half_width >= pr.spacing) {
        return Err(invalid("probe.spacing", "need 0 < spacing ≤ half_width"));
    }
    if pr.half_width / pr.spacing > 1e7 {
        return Err(invalid("probe.spacing", "scan would exceed 2·10⁷ points"));
    }
    Ok(RunConfig {
        scenario: raw.scenario,
        grid,
        phys,
        time: raw.time,
        init: raw.init,
        diagnostics: raw.diagnostics,
        study: raw.study,
        probe: raw.probe,
        outputs: raw.outputs,
    })
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "run"
[grid]
n = 32
[phys]
a = 1.0
b = 1.0
c = 1.0
kappa = 1.0
lambda = 1.0
mu = 1.0
gamma = 1.0
[time]
dt = 0.01
t_end = 1.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.scenario, Some(Scenario::Run));
        assert_eq!(cfg.grid.n, 32);
        assert_eq!(cfg.grid.dealias, DealiasRule::TwoThirds);
        assert_eq!(cfg.phys.c_star, -1.0);
        assert_eq!(cfg.time.output_cadence, 0.1);
        assert_eq!(cfg.time.cadence_steps(), 10);
        assert_eq!(cfg.init.family, InitFamily::Gaussian);
        assert_eq!(cfg.diagnostics.s, 2);
        assert_eq!(cfg.outputs.series_path, "series.csv");
    }

    #[test]
    fn derived_parameterization() {
        let cfg = parse_config("[phys]\nc = 3.0\nc_star = 1.0\nalpha2 = 0.5\n").unwrap();
        assert_eq!((cfg.phys.a, cfg.phys.kappa, cfg.phys.c_star), (1.0, 4.5, 1.0));
        let both = parse_config("[phys]\na = 1.0\nkappa = 4.5\nc = 3.0\nc_star = 1.0\nalpha2 = 0.5\n").unwrap();
        assert_eq!(both.phys, cfg.phys);
    }

    #[test]
    fn inconsistent_forms_are_rejected() {
        let err = parse_config("[phys]\na = 1.0\nc = 3.0\nc_star = 2.0\nkappa = 1.0\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "phys.a"), "{err}");
        let err = parse_config("[phys]\na = 1.0\nc = 2.0\nalpha2 = 1.0\nkappa = 1.0\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "phys.kappa"), "{err}");
    }

    #[test]
    fn tumbling_parameter_is_out_of_scope() {
        let err = parse_config("[phys]\na = 1.0\nkappa = 1.0\nxi = 0.3\n").unwrap_err();
        assert!(matches!(err, ConfigError::OutOfScope { .. }));
        assert!(err.to_string().contains("tumbling"));
    }

    #[test]
    fn unknown_keys_and_syntax_errors() {
        let err = parse_config("[phys]\na = 1.0\nkappa = 1.0\n[time]\ndtt = 0.1\n").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("dtt"));
            }
            e => panic!("unexpected {e}"),
        }
        let err = parse_config("[phys]\na = = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        assert!(matches!(parse_config("[phys]\nkappa = 1.0\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse_config("[grid]\nn = 7\n[phys]\na = 1\nkappa = 1\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(
            parse_config("[phys]\na = 1.0\nkappa = 1.0\n[time]\ndt = -1.0\n"),
            Err(ConfigError::Invalid { key, .. }) if key == "time.dt"
        ));
    }

    #[test]
    fn study_times_are_log_spaced() {
        let t = RunConfig::default().study.times();
        assert_eq!(t.len(), 61);
        assert!((t[0] - 1.0).abs() < 1e-12 && (t[60] - 1e3).abs() < 1e-9);
        assert!((t[20] - 10.0).abs() < 1e-10);
    }
}
