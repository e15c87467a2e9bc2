use serde::{Deserialize, Serialize};

use super::operator::{NonlinearOperator, NonlinearResidual};
use crate::error::{Error, Result};
use crate::grid::{dealias, project_mode, GridSpec, SpectralField, SpectralState};
use crate::kernels::PropagatorTable;
use crate::qtensor::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 on `w̃ = e^{−Lτ} w`, with `e^{Lτ}` applied exactly.
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Leray-project `û` every this many steps (0 disables).
    pub reproject_every: usize,
    /// When false the nonlinear residual is skipped and a step is the exact
    /// linear propagator.
    pub nonlinear: bool,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Result<Self> {
        let cfg = Self { dt, scheme: Scheme::IfRk4, reproject_every: 1, nonlinear: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Integrating-factor RK4 driver for one parameter set and step size.
#[derive(Debug)]
pub struct Stepper {
    cfg: StepperConfig,
    op: NonlinearOperator,
    half: PropagatorTable,
    steps: usize,
    k: [NonlinearResidual; 4],
    ew: (SpectralField, SpectralField),
    stage: (SpectralField, SpectralField),
    /// In-band storage as runs `(start, len)` within one component.
    segs: Vec<(usize, usize)>,
    /// In-band modes `(index, ξ)` for the Leray hygiene step.
    modes: Vec<(usize, [f64; 3])>,
}

/// `dst = base + Σ aᵢ xᵢ` on the band segments (`base = None` accumulates into `dst`).
fn comb(dst: &mut SpectralField, base: Option<&SpectralField>, terms: &[(f64, &SpectralField)], segs: &[(usize, usize)]) {
    let p = dst.points();
    for c in 0..dst.ncomp() {
        for &(s0, len) in segs {
            let r = c * p + s0..c * p + s0 + len;
            let d = &mut dst.data_mut()[r.clone()];
            if let Some(b) = base {
                d.copy_from_slice(&b.data()[r.clone()]);
            }
            for &(a, x) in terms {
                for (y, v) in d.iter_mut().zip(&x.data()[r.clone()]) {
                    *y += v * a;
                }
            }
        }
    }
}

impl Stepper {
    pub fn new(state: &SpectralState, params: &PhysParams, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        let n = state.grid.n;
        let pair = || (SpectralField::zeros(n, 5), SpectralField::zeros(n, 3));
        Ok(Self {
            op: NonlinearOperator::new(state.grid, *params),
            half: PropagatorTable::new(&state.grid, params, 0.5 * cfg.dt)?,
            cfg,
            steps: 0,
            k: std::array::from_fn(|_| NonlinearResidual::zeros(n)),
            ew: pair(),
            stage: pair(),
            segs: band_segments(&state.grid),
            modes: band_modes(&state.grid),
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn residual(&mut self, which: usize, from_stage: bool, q: &SpectralField, u: &SpectralField) -> Result<()> {
        let (q, u) = if from_stage { (&self.stage.0, &self.stage.1) } else { (q, u) };
        let out = &mut self.k[which];
        if self.cfg.nonlinear {
            self.op.eval_into(q, u, out)
        } else {
            out.gq.scale(0.0);
            out.gu.scale(0.0);
            Ok(())
        }
    }

    /// Advance by one step in place.
    ///
    /// With `E = e^{L h/2}`:
    /// `k₁ = N(w)`, `k₂ = N(E(w + h/2 k₁))`, `k₃ = N(Ew + h/2 k₂)`,
    /// `k₄ = N(E(Ew + h k₃))`,
    /// `w' = E(E(w + h/6 k₁) + h/3 (k₂ + k₃)) + h/6 k₄`.
    pub fn step(&mut self, state: &mut SpectralState) -> Result<()> {
        let h = self.cfg.dt;
        let segs = std::mem::take(&mut self.segs);
        // Stages only touch the band, so everything outside it must be zero.
        dealias(&state.grid, &mut state.qhat);
        dealias(&state.grid, &mut state.uhat);
        self.residual(0, false, &state.qhat, &state.uhat)?;

        // E w
        comb(&mut self.ew.0, Some(&state.qhat), &[], &segs);
        comb(&mut self.ew.1, Some(&state.uhat), &[], &segs);
        self.half.apply_in_band(&mut self.ew.0, &mut self.ew.1);

        // Stage 2 input: E(w + h/2 k1)
        comb(&mut self.stage.0, Some(&state.qhat), &[(0.5 * h, &self.k[0].gq)], &segs);
        comb(&mut self.stage.1, Some(&state.uhat), &[(0.5 * h, &self.k[0].gu)], &segs);
        self.half.apply_in_band(&mut self.stage.0, &mut self.stage.1);
        self.residual(1, true, &state.qhat, &state.uhat)?;

        // Stage 3 input: Ew + h/2 k2
        comb(&mut self.stage.0, Some(&self.ew.0), &[(0.5 * h, &self.k[1].gq)], &segs);
        comb(&mut self.stage.1, Some(&self.ew.1), &[(0.5 * h, &self.k[1].gu)], &segs);
        self.residual(2, true, &state.qhat, &state.uhat)?;

        // Stage 4 input: E(Ew + h k3)
        comb(&mut self.stage.0, Some(&self.ew.0), &[(h, &self.k[2].gq)], &segs);
        comb(&mut self.stage.1, Some(&self.ew.1), &[(h, &self.k[2].gu)], &segs);
        self.half.apply_in_band(&mut self.stage.0, &mut self.stage.1);
        self.residual(3, true, &state.qhat, &state.uhat)?;

        let [k1, k2, k3, k4] = &self.k;
        let q = &mut state.qhat;
        let u = &mut state.uhat;
        comb(q, None, &[(h / 6.0, &k1.gq)], &segs);
        comb(u, None, &[(h / 6.0, &k1.gu)], &segs);
        self.half.apply_in_band(q, u);
        comb(q, None, &[(h / 3.0, &k2.gq), (h / 3.0, &k3.gq)], &segs);
        comb(u, None, &[(h / 3.0, &k2.gu), (h / 3.0, &k3.gu)], &segs);
        self.half.apply_in_band(q, u);
        comb(q, None, &[(h / 6.0, &k4.gq)], &segs);
        comb(u, None, &[(h / 6.0, &k4.gu)], &segs);
        self.segs = segs;

        self.steps += 1;
        state.t += h;
        if self.cfg.reproject_every > 0 && self.steps.is_multiple_of(self.cfg.reproject_every) {
            let p = state.grid.points();
            let ud = state.uhat.data_mut();
            for &(idx, xi) in &self.modes {
                let v = project_mode(xi, [ud[idx], ud[p + idx], ud[2 * p + idx]]);
                for l in 0..3 {
                    ud[l * p + idx] = v[l];
                }
            }
        }
        let finite = |f: &SpectralField| {
            let p = f.points();
            (0..f.ncomp()).all(|c| self.segs.iter().all(|&(s0, len)| f.data()[c * p + s0..c * p + s0 + len].iter().all(|z| z.re.is_finite() && z.im.is_finite())))
        };
        if !(finite(&state.qhat) && finite(&state.uhat)) {
            return Err(Error::Blowup { step: self.steps, t: state.t });
        }
        Ok(())
    }
}

fn band_segments(grid: &GridSpec) -> Vec<(usize, usize)> {
    let n = grid.n;
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for i1 in (0..n).filter(|&i| grid.in_band(i)) {
        for i2 in (0..n).filter(|&i| grid.in_band(i)) {
            for i3 in (0..n).filter(|&i| grid.in_band(i)) {
                let idx = (i1 * n + i2) * n + i3;
                match segs.last_mut() {
                    Some((s, l)) if *s + *l == idx => *l += 1,
                    _ => segs.push((idx, 1)),
                }
            }
        }
    }
    segs
}

fn band_modes(grid: &GridSpec) -> Vec<(usize, [f64; 3])> {
    let n = grid.n;
    let k = grid.wavenumbers();
    let mut out = Vec::new();
    for i1 in (0..n).filter(|&i| grid.in_band(i)) {
        for i2 in (0..n).filter(|&i| grid.in_band(i)) {
            for i3 in (0..n).filter(|&i| grid.in_band(i)) {
                out.push(((i1 * n + i2) * n + i3, [k[i1], k[i2], k[i3]]));
            }
        }
    }
    out
}

/// Number of steps of size `dt` that reach `horizon` (rounded to nearest).
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// Advance `state` to `state.t + horizon`, calling `observer(state, step)` at
/// step 0 and after every step. The observer may abort by returning an error.
pub fn run(
    mut state: SpectralState,
    params: &PhysParams,
    cfg: StepperConfig,
    horizon: f64,
    mut observer: impl FnMut(&SpectralState, usize) -> Result<()>,
) -> Result<SpectralState> {
    let nsteps = step_count(horizon, cfg.dt)?;
    let mut stepper = Stepper::new(&state, params, cfg)?;
    observer(&state, 0)?;
    for k in 1..=nsteps {
        stepper.step(&mut state)?;
        observer(&state, k)?;
    }
    Ok(state)
}
