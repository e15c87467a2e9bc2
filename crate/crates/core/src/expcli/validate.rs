//! Property suites run by the `validate` scenario.

use serde::Serialize;
use serde_json::json;

use super::config::ProbeConfig;
use super::studies::kernel_probe_scan;
use crate::diagnostics::{
    cancellation_residuals, commutator_ratio, energy_functionals, modq_sobolev_ratio, random_band_limited, random_state,
};
use crate::dynamics::{build_initial, run, InitFamily, InitSpec, StepperConfig};
use crate::error::Result;
use crate::grid::{gradient, GridSpec, SpectralState};
use crate::kernels::propagate_linear;
use crate::qtensor::PhysParams;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Measured quantity compared against `threshold`.
    pub metric: f64,
    pub threshold: String,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn suite(name: &str, passed: bool, metric: f64, threshold: &str, details: serde_json::Value) -> SuiteResult {
    SuiteResult { name: name.into(), passed, metric, threshold: threshold.into(), details }
}

/// Parameters for the stepper suites (supercritical, strongly coupled).
pub fn suite_params() -> Result<PhysParams> {
    PhysParams::new(1.0, 6.0, 1.0, 1.5, 0.7, 1.0, 1.0)
}

/// Cancellation residuals on `count` random solenoidal states (16³, band 5).
pub fn cancellation_suite(seed: u64, count: u64) -> Result<SuiteResult> {
    let grid = GridSpec::periodic(16)?;
    let mut worst = [0.0f64; 5];
    for i in 0..count {
        let r = cancellation_residuals(&random_state(&grid, 5, seed + i)?)?;
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let m = worst.iter().copied().fold(0.0, f64::max);
    Ok(suite("cancellations", m < 1e-10, m, "< 1e-10", json!({ "states": count, "max_per_identity": worst })))
}

/// A compressible velocity must break the first identity.
pub fn negative_control_suite(seed: u64) -> Result<SuiteResult> {
    let grid = GridSpec::periodic(16)?;
    let mut st = random_state(&grid, 5, seed)?;
    st.uhat.axpy(1.0, &gradient(&grid, &random_band_limited(&grid, 1, 4, seed + 1)));
    let r = cancellation_residuals(&st)?[0];
    Ok(suite("cancellations_negative_control", r > 1e-6, r, "> 1e-6", json!({})))
}

/// Commutator ratios at `s = k = 2` on 32³ fields band-limited to `|m_i| ≤ 7`.
pub fn commutator_suite(seed: u64, count: u64) -> Result<SuiteResult> {
    let grid = GridSpec::periodic(32)?;
    let mut worst = [0.0f64; 3];
    let mut finite = true;
    for i in 0..count {
        let s = seed + 3 * i;
        let psi = random_band_limited(&grid, 1, 7, s);
        let phi = random_band_limited(&grid, 1, 7, s + 1);
        let big = random_band_limited(&grid, 1, 7, s + 2);
        let r = commutator_ratio(&grid, &psi, &phi, &big, 2, 2)?;
        finite &= r.iter().all(|v| v.is_finite() && *v > 0.0);
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let m = worst.iter().copied().fold(0.0, f64::max);
    Ok(suite(
        "commutators",
        finite && m < 50.0,
        m,
        "< 50",
        json!({ "samples": count, "s": 2, "k": 2, "max_ratio_per_commutator": worst }),
    ))
}

/// `‖|Q|‖_{H²}/‖Q‖_{H²}` on 32³ fields band-limited to `|m_i| ≤ 7`.
pub fn modq_suite(seed: u64, count: u64) -> Result<SuiteResult> {
    let grid = GridSpec::periodic(32)?;
    let mut worst: f64 = 0.0;
    let mut least = f64::INFINITY;
    for i in 0..count {
        let r = modq_sobolev_ratio(&grid, &random_band_limited(&grid, 5, 7, seed + 1000 + i), 2)?;
        worst = worst.max(r);
        least = least.min(r);
    }
    Ok(suite(
        "modq_bound",
        worst.is_finite() && worst < 10.0,
        worst,
        "< 10",
        json!({ "samples": count, "s": 2, "min_ratio": least }),
    ))
}

fn initial(n: usize, family: InitFamily, energy: f64, seed: u64) -> Result<SpectralState> {
    let spec = InitSpec { family, energy: Some(energy), amplitude: None, sigma: 0.7, seed };
    build_initial(&GridSpec::periodic(n)?, &spec, 2)
}

/// Trace and solenoidality residuals along a short nonlinear run.
pub fn invariants_suite(seed: u64) -> Result<SuiteResult> {
    let p = suite_params()?;
    let st = initial(16, InitFamily::Random, 1.0, seed)?;
    let (mut tr, mut dv) = (0.0f64, 0.0f64);
    run(st, &p, StepperConfig::new(0.01)?, 0.2, |s, _| {
        let r = energy_functionals(s, 2, &p)?;
        tr = tr.max(r.trace_res);
        dv = dv.max(r.div_res);
        Ok(())
    })?;
    let m = tr.max(dv);
    Ok(suite("trace_div_invariants", m < 1e-12, m, "< 1e-12", json!({ "max_trace_res": tr, "max_div_res": dv })))
}

/// 100 linear steps against the exact propagator.
pub fn stepper_linear_suite(seed: u64) -> Result<SuiteResult> {
    let p = suite_params()?;
    let st = initial(16, InitFamily::Random, 1.0, seed)?;
    let cfg = StepperConfig { nonlinear: false, ..StepperConfig::new(0.01)? };
    let stepped = run(st.clone(), &p, cfg, 1.0, |_, _| Ok(()))?;
    let exact = propagate_linear(&st, &p, 1.0)?;
    let dev = stepped.max_abs_diff(&exact) / exact.max_abs();
    Ok(suite("stepper_linear_exactness", dev < 1e-12, dev, "< 1e-12 relative", json!({ "steps": 100 })))
}

/// Observed order from the Richardson triple `dt, dt/2, dt/4`.
pub fn richardson_order(state: &SpectralState, p: &PhysParams, dt: f64, horizon: f64) -> Result<f64> {
    let evolve = |h: f64| run(state.clone(), p, StepperConfig::new(h)?, horizon, |_, _| Ok(()));
    let (w1, w2, w3) = (evolve(dt)?, evolve(dt / 2.0)?, evolve(dt / 4.0)?);
    Ok((w1.max_abs_diff(&w2) / w2.max_abs_diff(&w3)).log2())
}

pub fn stepper_order_suite(seed: u64) -> Result<SuiteResult> {
    let p = suite_params()?;
    let st = initial(16, InitFamily::Random, 20.0, seed)?;
    let order = richardson_order(&st, &p, 0.1, 0.4)?;
    Ok(suite(
        "stepper_order",
        (3.5..=4.3).contains(&order),
        order,
        "in [3.5, 4.3]",
        json!({ "dt": [0.1, 0.05, 0.025], "horizon": 0.4 }),
    ))
}

/// Resonance scan `μ = 2, Γ = a = κ = 1`.
pub fn kernel_continuity_suite() -> Result<SuiteResult> {
    let p = PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0)?;
    let r = kernel_probe_scan(&ProbeConfig::default(), &p)?;
    let mis = r.stats.iter().map(|s| s.max_rel_mismatch).fold(0.0, f64::max);
    let jump = r.stats.iter().map(|s| s.max_jump).fold(0.0, f64::max);
    Ok(suite(
        "kernel_b_continuity",
        mis < 1e-10 && jump < 1e-9,
        jump,
        "jump < 1e-9, mismatch < 1e-10",
        json!({ "max_rel_mismatch": mis, "per_t": r.stats }),
    ))
}

pub fn validate_all(seed: u64) -> Result<ValidationReport> {
    let suites = vec![
        cancellation_suite(seed, 20)?,
        negative_control_suite(seed)?,
        commutator_suite(seed, 50)?,
        modq_suite(seed, 50)?,
        invariants_suite(seed)?,
        stepper_linear_suite(seed)?,
        stepper_order_suite(seed)?,
        kernel_continuity_suite()?,
    ];
    Ok(ValidationReport { seed, passed: suites.iter().all(|s| s.passed), suites })
}
