//! Whole-space linear studies and the resonance scan.

use serde::Serialize;

use super::config::{ProbeConfig, StudyConfig};
use crate::diagnostics::{fit_decay, fit_decay_log, lower_bound_check, DecayFit};
use crate::error::{Error, Result};
use crate::kernels::{
    gaussian_closed_form, kernel_a, kernel_b, kernel_b_two_branch, kernel_c, linear_q_norm, linear_u_norm, Kernel,
    KernelPoint, RadialProfile,
};
use crate::qtensor::PhysParams;

/// Gaussian profiles `e^{−r²/2σ²}` for `Q̂₀` and `û₀`. The default widths
/// `σ² = 1/(2Γ)` and `1/(2μ)` make `‖∂^k Q_L‖` exactly
/// `C (1+t)^{−3/4−k/2} e^{−aΓt}`.
pub fn study_profiles(study: &StudyConfig, p: &PhysParams) -> Result<(RadialProfile, RadialProfile)> {
    let qs = study.q_sigma.unwrap_or(1.0 / (2.0 * p.gamma).sqrt());
    let us = study.u_sigma.unwrap_or(1.0 / (2.0 * p.mu).sqrt());
    Ok((RadialProfile::gaussian(1.0, qs)?, RadialProfile::gaussian(1.0, us)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub k: u32,
    pub fit: DecayFit,
    pub expected_alpha: f64,
    pub expected_beta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearDecayReport {
    pub times: Vec<f64>,
    /// `ln ‖∂^k Q_L‖` per entry of `q_orders`.
    pub ln_q: Vec<Vec<f64>>,
    /// `‖∂^k u_L‖` per entry of `u_orders`.
    pub u: Vec<Vec<f64>>,
    pub q_fits: Vec<OrderFit>,
    pub u_fits: Vec<OrderFit>,
    /// Largest relative deviation of the `Q` quadrature from the Gaussian closed form.
    pub closed_form_rel_err: f64,
}

pub fn linear_decay_study(study: &StudyConfig, p: &PhysParams) -> Result<LinearDecayReport> {
    let (qp, up) = study_profiles(study, p)?;
    let times = study.times();
    let mut ln_q = Vec::new();
    let mut q_fits = Vec::new();
    let mut worst: f64 = 0.0;
    for &k in &study.q_orders {
        let mut col = Vec::with_capacity(times.len());
        for &t in &times {
            let q = linear_q_norm(k, t, study.q_bar, &qp, p, study.tol)?;
            if let Some(cf) = gaussian_closed_form(Kernel::A, k, t, &qp, p) {
                worst = worst.max(((q.ln() - cf.times(study.q_bar).ln()).exp() - 1.0).abs());
            }
            col.push(q.ln());
        }
        let series: Vec<(f64, f64)> = times.iter().copied().zip(col.iter().copied()).collect();
        q_fits.push(OrderFit {
            k,
            fit: fit_decay_log(&series, study.window)?,
            expected_alpha: 0.75 + 0.5 * k as f64,
            expected_beta: p.a * p.gamma,
        });
        ln_q.push(col);
    }
    let mut u = Vec::new();
    let mut u_fits = Vec::new();
    for &k in &study.u_orders {
        let col = times
            .iter()
            .map(|&t| linear_u_norm(k, t, study.q_bar, &qp, study.u_bar, &up, p, study.tol))
            .collect::<Result<Vec<f64>>>()?;
        let series: Vec<(f64, f64)> = times.iter().copied().zip(col.iter().copied()).collect();
        u_fits.push(OrderFit {
            k,
            fit: fit_decay(&series, study.window)?,
            expected_alpha: 0.75 + 0.5 * k as f64,
            expected_beta: 0.0,
        });
        u.push(col);
    }
    Ok(LinearDecayReport { times, ln_q, u, q_fits, u_fits, closed_form_rel_err: worst })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundOrder {
    pub k: u32,
    pub inf: f64,
    pub sup: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub orders: Vec<LowerBoundOrder>,
}

/// Compensated series `(1+t)^{3/4+k/2}‖∂^k u_L‖` over the study window.
pub fn lower_bound_study(study: &StudyConfig, p: &PhysParams) -> Result<LowerBoundReport> {
    if study.u_bar == 0.0 {
        return Err(Error::Degenerate("lower bound needs û₀(0) ≠ 0 (u_bar = 0)".into()));
    }
    let (qp, up) = study_profiles(study, p)?;
    let times = study.times();
    let mut u = Vec::new();
    let mut orders = Vec::new();
    for &k in &study.u_orders {
        let col = times
            .iter()
            .map(|&t| linear_u_norm(k, t, study.q_bar, &qp, study.u_bar, &up, p, study.tol))
            .collect::<Result<Vec<f64>>>()?;
        let series: Vec<(f64, f64)> = times.iter().copied().zip(col.iter().copied()).collect();
        let (inf, sup) = lower_bound_check(&series, k)?;
        orders.push(LowerBoundOrder { k, inf, sup, ratio: sup / inf });
        u.push(col);
    }
    Ok(LowerBoundReport { times, u, orders })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeStats {
    pub t: f64,
    pub points: usize,
    /// Largest relative gap between the φ₁ form and the two-branch quotient
    /// where `|d·t| > 1e−3`.
    pub max_rel_mismatch: f64,
    /// Largest second difference `|B(k+h) − 2B(k) + B(k−h)|` along the scan.
    pub max_jump: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub center: f64,
    /// `(k2, t, A, B, C, d)`.
    #[serde(skip)]
    pub rows: Vec<[f64; 6]>,
    pub stats: Vec<ProbeStats>,
}

pub fn kernel_probe_scan(probe: &ProbeConfig, p: &PhysParams) -> Result<ProbeReport> {
    let center = probe.center.or_else(|| p.resonance_k2()).unwrap_or(1.0);
    let m = (probe.half_width / probe.spacing).round() as i64;
    let mut rows = Vec::new();
    let mut stats = Vec::new();
    for &t in &probe.times {
        let mut b = Vec::with_capacity((2 * m + 1) as usize);
        let mut mismatch: f64 = 0.0;
        for i in -m..=m {
            let k2 = center + i as f64 * probe.spacing;
            let pt = KernelPoint::new(t, k2, *p)?;
            let d = pt.detuning();
            let bv = kernel_b(&pt);
            if (d * t).abs() > 1e-3 {
                let two = kernel_b_two_branch(&pt);
                mismatch = mismatch.max(((bv - two) / two).abs());
            }
            rows.push([k2, t, kernel_a(&pt), bv, kernel_c(&pt), d]);
            b.push(bv);
        }
        let jump = b.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).fold(0.0, f64::max);
        stats.push(ProbeStats { t, points: b.len(), max_rel_mismatch: mismatch, max_jump: jump });
    }
    Ok(ProbeReport { center, rows, stats })
}
