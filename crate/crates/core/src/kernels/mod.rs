//! Green-function kernels of the linearized system
//!
//! ```text
//! Q_t − ΓΔQ + aΓQ = 0,    u_t − μΔu − κ P div Q = 0
//! ```
//!
//! whose Fourier solution is `Q̂(t) = A Q̂₀`,
//! `û(t) = iB P(Q̂₀ξ) + C û₀` with
//! `A = e^{−Γ(|ξ|²+a)t}`, `C = e^{−μ|ξ|²t}` and
//! `B = κ t e^{−μ|ξ|²t} φ₁(dt)`, `d = (μ−Γ)|ξ|² − aΓ`.

mod profile;
pub mod quadrature;

pub use profile::{ProfileShape, RadialProfile};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField, SpectralState};
use crate::qtensor::PhysParams;
use profile::{gamma_half, RADIAL_MEASURE};

/// `(e^z − 1)/z`, continuous through `z = 0`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() >= 1e-5 {
        z.exp_m1() / z
    } else {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    }
}

/// Evaluation point `(t, |ξ|²)` of the kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub t: f64,
    pub k2: f64,
    pub p: PhysParams,
}

impl KernelPoint {
    pub fn new(t: f64, k2: f64, p: PhysParams) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0 && k2.is_finite() && k2 >= 0.0) {
            return Err(Error::InvalidParams(format!("kernel point needs finite t, k2 ≥ 0, got t = {t}, k2 = {k2}")));
        }
        Ok(Self { t, k2, p })
    }

    /// Rate mismatch `d = (μ−Γ)|ξ|² − aΓ`.
    pub fn detuning(&self) -> f64 {
        (self.p.mu - self.p.gamma) * self.k2 - self.p.a * self.p.gamma
    }
}

pub fn kernel_a(pt: &KernelPoint) -> f64 {
    (-pt.p.gamma * (pt.k2 + pt.p.a) * pt.t).exp()
}

pub fn kernel_c(pt: &KernelPoint) -> f64 {
    (-pt.p.mu * pt.k2 * pt.t).exp()
}

/// `κ t e^{−μ|ξ|²t} φ₁(dt)`. For `dt > 0` the equal value
/// `κ t e^{−Γ(|ξ|²+a)t} φ₁(−dt)` is used so no factor overflows.
pub fn kernel_b(pt: &KernelPoint) -> f64 {
    let p = &pt.p;
    let dt = pt.detuning() * pt.t;
    if dt > 0.0 {
        p.kappa * pt.t * (-p.gamma * (pt.k2 + p.a) * pt.t).exp() * phi1(-dt)
    } else {
        p.kappa * pt.t * (-p.mu * pt.k2 * pt.t).exp() * phi1(dt)
    }
}

/// Two-branch form of `B`: the quotient `κ(A − C)/d` off resonance and
/// `κ t e^{−μ|ξ|²t}` at `d = 0`. Reference only; it loses accuracy as `d → 0`.
pub fn kernel_b_two_branch(pt: &KernelPoint) -> f64 {
    let d = pt.detuning();
    if d == 0.0 {
        pt.p.kappa * pt.t * kernel_c(pt)
    } else {
        pt.p.kappa * (kernel_a(pt) - kernel_c(pt)) / d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kernel {
    A,
    B,
    C,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::A, Kernel::B, Kernel::C];

    pub fn eval(self, pt: &KernelPoint) -> f64 {
        match self {
            Kernel::A => kernel_a(pt),
            Kernel::B => kernel_b(pt),
            Kernel::C => kernel_c(pt),
        }
    }

    /// `ln` of the factor split off before squaring and integrating, so that
    /// `e^{−aΓt}` never underflows inside the quadrature.
    fn log_shift(self, t: f64, p: &PhysParams) -> f64 {
        match self {
            Kernel::A => -p.a * p.gamma * t,
            _ => 0.0,
        }
    }

    /// Kernel value divided by `e^{log_shift}`.
    fn scaled(self, t: f64, k2: f64, p: &PhysParams) -> f64 {
        match self {
            Kernel::A => (-p.gamma * k2 * t).exp(),
            Kernel::B => kernel_b(&KernelPoint { t, k2, p: *p }),
            Kernel::C => (-p.mu * k2 * t).exp(),
        }
    }

    /// Slowest Gaussian rate in `|K|²` as a function of `r²`.
    fn rate(self, p: &PhysParams) -> f64 {
        match self {
            Kernel::A => p.gamma,
            Kernel::B => p.gamma.min(p.mu),
            Kernel::C => p.mu,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kernel::A => "A",
            Kernel::B => "B",
            Kernel::C => "C",
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Kernel::A),
            "B" | "b" => Ok(Kernel::B),
            "C" | "c" => Ok(Kernel::C),
            _ => Err(Error::InvalidParams(format!("unknown kernel {s:?}"))),
        }
    }
}

/// `A`, `B`, `C` sampled for one step size on every integer `|m|²` of a grid.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    dt: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    modes: Vec<i64>,
    keep: Vec<bool>,
    k0: f64,
}

impl PropagatorTable {
    pub fn new(grid: &GridSpec, p: &PhysParams, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::InvalidParams(format!("dt must be finite and nonnegative, got {dt}")));
        }
        let half = grid.n / 2;
        let len = 3 * half * half + 1;
        let k0 = grid.k0();
        let (mut a, mut b, mut c) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        for m2 in 0..len {
            let pt = KernelPoint { t: dt, k2: k0 * k0 * m2 as f64, p: *p };
            a[m2] = kernel_a(&pt);
            b[m2] = kernel_b(&pt);
            c[m2] = kernel_c(&pt);
        }
        let keep = (0..grid.n).map(|i| grid.in_band(i)).collect();
        Ok(Self { dt, a, b, c, modes: grid.int_modes(), keep, k0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `(Q̂, û)` by the table's `dt` under the linear flow, in place.
    pub fn apply(&self, q: &mut SpectralField, u: &mut SpectralField) {
        self.apply_where(q, u, |_| true);
    }

    /// As [`PropagatorTable::apply`] on the dealiasing band only; modes outside
    /// it are left untouched.
    pub fn apply_in_band(&self, q: &mut SpectralField, u: &mut SpectralField) {
        self.apply_where(q, u, |i| self.keep[i]);
    }

    fn apply_where(&self, q: &mut SpectralField, u: &mut SpectralField, keep: impl Fn(usize) -> bool) {
        let n = self.modes.len();
        let p = n * n * n;
        let qd = q.data_mut();
        let ud = u.data_mut();
        for (i1, &m1) in self.modes.iter().enumerate().filter(|(i, _)| keep(*i)) {
            for (i2, &m2) in self.modes.iter().enumerate().filter(|(i, _)| keep(*i)) {
                for (i3, &m3) in self.modes.iter().enumerate().filter(|(i, _)| keep(*i)) {
                    let idx = (i1 * n + i2) * n + i3;
                    let msq = (m1 * m1 + m2 * m2 + m3 * m3) as usize;
                    let (a, b, c) = (self.a[msq], self.b[msq], self.c[msq]);
                    let xi = [self.k0 * m1 as f64, self.k0 * m2 as f64, self.k0 * m3 as f64];
                    let qv: [Complex64; 5] = std::array::from_fn(|k| qd[k * p + idx]);
                    if b != 0.0 && msq != 0 {
                        let m = crate::grid::expand_complex(qv);
                        let div: [Complex64; 3] =
                            std::array::from_fn(|j| m[j][0] * xi[0] + m[j][1] * xi[1] + m[j][2] * xi[2]);
                        let s = crate::grid::project_mode(xi, div);
                        for l in 0..3 {
                            let v = &mut ud[l * p + idx];
                            *v = *v * c + Complex64::new(-s[l].im, s[l].re) * b;
                        }
                    } else {
                        for l in 0..3 {
                            ud[l * p + idx] *= c;
                        }
                    }
                    for k in 0..5 {
                        qd[k * p + idx] = qv[k] * a;
                    }
                }
            }
        }
    }
}

/// Exact linear evolution of a state over `dt`.
pub fn propagate_linear(state: &SpectralState, p: &PhysParams, dt: f64) -> Result<SpectralState> {
    let table = PropagatorTable::new(&state.grid, p, dt)?;
    let mut out = state.clone();
    table.apply(&mut out.qhat, &mut out.uhat);
    out.t += dt;
    Ok(out)
}

/// A positive quantity stored as `scaled · e^{log_shift}` so that factors
/// like `e^{−aΓt}` at large `t` do not underflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialNorm {
    pub scaled: f64,
    pub log_shift: f64,
}

impl RadialNorm {
    pub fn ln(&self) -> f64 {
        self.scaled.ln() + self.log_shift
    }

    /// Plain value (may underflow to 0).
    pub fn value(&self) -> f64 {
        self.scaled * self.log_shift.exp()
    }

    pub fn times(self, s: f64) -> Self {
        Self { scaled: self.scaled * s, log_shift: self.log_shift }
    }
}

/// Breakpoints on `[0, r_max]`: geometric multiples of the effective width
/// and the resonance radius.
fn breakpoints(width: f64, r_max: f64, extra: Option<f64>) -> Vec<f64> {
    let mut pts = vec![0.0, r_max];
    let mut r = width / 8.0;
    while r < r_max {
        pts.push(r);
        r *= 2.0;
    }
    if let Some(x) = extra.filter(|x| *x > 0.0 && *x < r_max) {
        pts.push(x);
        pts.push(x * (1.0 - 1e-3));
        pts.push(x * (1.0 + 1e-3));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("quadrature tolerance must be positive, got {tol}")))
    }
}

/// `(2π)^{−3}·4π ∫₀^∞ r^{2k+2} Σ_i w_i(r)² dr` over `[0, profile r_max]`.
fn radial_integral(
    terms: &dyn Fn(f64) -> f64,
    width: f64,
    r_max: f64,
    resonance: Option<f64>,
    tol: f64,
) -> Result<f64> {
    let pts = breakpoints(width, r_max, resonance);
    Ok(RADIAL_MEASURE * quadrature::integrate(terms, &pts, tol, quadrature::MAX_INTERVALS)?)
}

fn effective_width(profile: &RadialProfile, rate: f64, t: f64) -> f64 {
    let s = profile.scale();
    1.0 / (1.0 / (s * s) + 2.0 * rate * t).sqrt()
}

/// `‖∂^k(Ǩ ∗ f)‖_{L²}` on `R³` for radial `f̂`, by adaptive quadrature to
/// relative tolerance `tol` on the square.
pub fn radial_norm_quadrature(
    kernel: Kernel,
    k: u32,
    t: f64,
    profile: &RadialProfile,
    p: &PhysParams,
    tol: f64,
) -> Result<RadialNorm> {
    check_tol(tol)?;
    profile.validate()?;
    let integrand = |r: f64| {
        let kv = kernel.scaled(t, r * r, p);
        let f = profile.value(r);
        r.powi(2 * k as i32 + 2) * kv * kv * f * f
    };
    let width = effective_width(profile, kernel.rate(p), t);
    let res = p.resonance_k2().map(f64::sqrt);
    let sq = radial_integral(&integrand, width, profile.r_max(), res, tol)?;
    Ok(RadialNorm { scaled: sq.sqrt(), log_shift: kernel.log_shift(t, p) })
}

/// Closed form of [`radial_norm_quadrature`] for kernels `A`, `C` and a
/// Gaussian profile: with `β = 1/σ² + 2γt` and `m = k + p + 1`,
/// `‖·‖² = (2π)^{−3}·4π·amp²·Γ(m+½)/(2β^{m+½})` times `e^{−2aΓt}` for `A`.
pub fn gaussian_closed_form(kernel: Kernel, k: u32, t: f64, profile: &RadialProfile, p: &PhysParams) -> Option<RadialNorm> {
    let sigma = match profile.shape {
        ProfileShape::Gaussian { sigma } => sigma,
        ProfileShape::Bump { .. } => return None,
    };
    let rate = match kernel {
        Kernel::A => p.gamma,
        Kernel::C => p.mu,
        Kernel::B => return None,
    };
    let beta = 1.0 / (sigma * sigma) + 2.0 * rate * t;
    let m = k + profile.r_power + 1;
    let sq = RADIAL_MEASURE * profile.amplitude.powi(2) * gamma_half(m) / (2.0 * beta.powf(m as f64 + 0.5));
    Some(RadialNorm { scaled: sq.sqrt(), log_shift: kernel.log_shift(t, p) })
}

/// `‖∂^k Q_L(t)‖_{L²}` for `Q̂₀(ξ) = Q̄ f̂(|ξ|)` with `|Q̄|_F = q_bar`.
pub fn linear_q_norm(k: u32, t: f64, q_bar: f64, profile: &RadialProfile, p: &PhysParams, tol: f64) -> Result<RadialNorm> {
    Ok(radial_norm_quadrature(Kernel::A, k, t, profile, p, tol)?.times(q_bar))
}

/// `‖∂^k u_L(t)‖_{L²}` for `Q̂₀ = Q̄ f̂_Q(|ξ|)` and `û₀ = P ū f̂_u(|ξ|)` with
/// constant `Q̄ ∈ S₀³`, `ū ∈ R³`.
///
/// Averaged over directions, `|P(Q̄n)|² → |Q̄|²/5`, `|Pū|² → 2|ū|²/3`, and
/// the cross term is odd in `n`, so
/// `|û|² → B² r² |Q̄|² f̂_Q²/5 + C² (2/3)|ū|² f̂_u²`.
#[allow(clippy::too_many_arguments)]
pub fn linear_u_norm(
    k: u32,
    t: f64,
    q_bar: f64,
    q_profile: &RadialProfile,
    u_bar: f64,
    u_profile: &RadialProfile,
    p: &PhysParams,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    q_profile.validate()?;
    u_profile.validate()?;
    let cq = q_bar * q_bar / 5.0;
    let cu = 2.0 * u_bar * u_bar / 3.0;
    let integrand = |r: f64| {
        let pt = KernelPoint { t, k2: r * r, p: *p };
        let b = kernel_b(&pt);
        let c = kernel_c(&pt);
        let fq = q_profile.value(r);
        let fu = u_profile.value(r);
        r.powi(2 * k as i32 + 2) * (b * b * r * r * cq * fq * fq + c * c * cu * fu * fu)
    };
    let wq = effective_width(q_profile, Kernel::B.rate(p), t);
    let wu = effective_width(u_profile, Kernel::C.rate(p), t);
    let r_max = q_profile.r_max().max(u_profile.r_max());
    let res = p.resonance_k2().map(f64::sqrt);
    let sq = radial_integral(&integrand, wq.min(wu), r_max, res, tol)?;
    Ok(sq.sqrt())
}

/// `‖∂^k(Ǩ∗f)‖_{L²}` divided by the convolution majorant
/// `e^{−aΓt}(1+t)^{−3/4−k/2}‖f‖_{L¹∩Hᵏ}` (kernel `A`) or
/// `(1+t)^{−3/4−k/2}‖f‖_{L¹∩Hᵏ}` (kernels `B`, `C`).
pub fn kernel_bound_ratio(kernel: Kernel, k: u32, t: f64, profile: &RadialProfile, p: &PhysParams, tol: f64) -> Result<f64> {
    let norm = radial_norm_quadrature(kernel, k, t, profile, p, tol)?;
    let fnorm = profile.l1_hk_norm(k, tol)?;
    if fnorm <= 0.0 {
        return Err(Error::Degenerate("profile has zero norm".into()));
    }
    let ln_major = kernel.log_shift(t, p) - (0.75 + 0.5 * k as f64) * (1.0 + t).ln() + fnorm.ln();
    if norm.scaled == 0.0 {
        return Ok(0.0);
    }
    Ok((norm.ln() - ln_major).exp())
}
