use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{expand_complex, solenoidal_residual, NormMoments, SpectralState, Transformer};
use crate::qtensor::PhysParams;

/// Energy, dissipation and time-weighted functionals of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub s: usize,
    /// `‖u‖²_{Hˢ} + M‖Q‖²_{Hˢ} + ‖∇Q‖²_{Hˢ}`
    pub e: f64,
    /// `μ‖∇u‖²_{Hˢ} + aMΓ‖Q‖²_{Hˢ} + (a+M)Γ‖∇Q‖²_{Hˢ} + Γ‖ΔQ‖²_{Hˢ}`
    pub d: f64,
    pub n: f64,
    pub mw: f64,
    pub hq: f64,
    /// `‖∂^k Q‖_{L²}` for `k = 0..=s+1`.
    pub q_l2: Vec<f64>,
    /// `‖∂^k u‖_{L²}` for `k = 0..=s`.
    pub u_l2: Vec<f64>,
    /// Bound `Σ_m |Tr Q̂_m| ≥ max_x |Tr Q(x)|`.
    pub trace_res: f64,
    /// Largest per-mode solenoidality residual of `û`.
    pub div_res: f64,
    /// Real part of the `ξ = 0` velocity mode.
    pub mean_u: [f64; 3],
}

/// Evaluate the functionals of `state` at Sobolev index `s`.
///
/// `N` and `Mw` carry the weights `(1+t)^k` on `‖∂^k ·‖²_{H^{s−k}}`, and
/// `Hq = Σ_{k≤s−2} (1+t)^{3/4+k/2}‖∂^k u‖ + Σ_{k≤s−1} (1+t)^{3/4+k/2} e^{aΓt/2}‖∂^k Q‖`.
pub fn energy_functionals(state: &SpectralState, s: usize, p: &PhysParams) -> Result<EnergyReport> {
    if !(p.a > 0.0) {
        return Err(Error::InvalidParams(format!("energy functionals need a > 0, got a = {}", p.a)));
    }
    if s > 12 {
        return Err(Error::InvalidParams(format!("Sobolev index {s} too large (max 12)")));
    }
    let m = p.energy_weight()?;
    let grid = &state.grid;
    let q = NormMoments::new(grid, &state.qhat, s + 1);
    let u = NormMoments::new(grid, &state.uhat, s + 1);
    let (a, g, mu) = (p.a, p.gamma, p.mu);

    let e = u.sq(0, 0, s) + m * q.sq(0, 0, s) + q.sq(1, 0, s);
    let d = mu * u.sq(1, 0, s) + a * m * g * q.sq(0, 0, s) + (a + m) * g * q.sq(1, 0, s) + g * q.sq(2, 0, s);

    let tp = 1.0 + state.t;
    let (mut n, mut mw) = (0.0, 0.0);
    for k in 0..=s {
        let w = tp.powi(k as i32);
        let r = s - k;
        n += w * (u.sq(0, k, r) + m * q.sq(0, k, r) + q.sq(1, k, r));
        mw += w
            * (0.5 * mu * u.sq(1, k, r)
                + 0.5 * a * m * g * q.sq(0, k, r)
                + (a + m) * g * q.sq(1, k, r)
                + g * q.sq(2, k, r));
    }
    let q_l2: Vec<f64> = (0..=s + 1).map(|k| q.l2_sq(k).sqrt()).collect();
    let u_l2: Vec<f64> = (0..=s).map(|k| u.l2_sq(k).sqrt()).collect();
    let growth = (0.5 * a * g * state.t).exp();
    let mut hq = 0.0;
    for k in 0..=s {
        let w = tp.powf(0.75 + 0.5 * k as f64);
        if k + 2 <= s {
            hq += w * u_l2[k];
        }
        if k < s {
            hq += w * growth * q_l2[k];
        }
    }

    let pts = grid.points();
    let qd = state.qhat.data();
    let trace_res = (0..pts)
        .map(|idx| {
            let mm = expand_complex(std::array::from_fn(|c| qd[c * pts + idx]));
            (mm[0][0] + mm[1][1] + mm[2][2]).norm()
        })
        .sum();
    let mean = state.uhat.data();
    Ok(EnergyReport {
        t: state.t,
        s,
        e,
        d,
        n,
        mw,
        hq,
        q_l2,
        u_l2,
        trace_res,
        div_res: solenoidal_residual(grid, &state.uhat)?,
        mean_u: [mean[0].re, mean[pts].re, mean[2 * pts].re],
    })
}

/// Grid maxima of `|Q|` (Frobenius) and `|u|`, an `L^∞` proxy exact only up
/// to grid resolution.
pub fn sup_norms(state: &SpectralState) -> Result<(f64, f64)> {
    let fft = Transformer::new(state.grid.n);
    let q = fft.backward(&state.qhat)?;
    let u = fft.backward(&state.uhat)?;
    Ok((q.max_pointwise_norm(), u.max_pointwise_norm()))
}
