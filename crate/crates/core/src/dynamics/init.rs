use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dealias, leray_project, sobolev_norm, GridSpec, RealField, SpectralState, Transformer};
use crate::qtensor::QTensor;

/// Default target for `E₀ = ‖Q₀‖²_{H^{s+1}} + ‖u₀‖²_{Hˢ}`.
pub const DEFAULT_E0: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitFamily {
    /// Localized Gaussian bumps of width `sigma` carrying a random tensor and vector.
    Gaussian,
    /// Random coefficients with spectral envelope `e^{−σ²|ξ|²/2}`.
    Random,
    /// `Q = cos(k₀x₁)(E3 + E1)`, `u = sin(k₀x₁) e₂`.
    SingleMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub family: InitFamily,
    /// Target `E₀`; takes precedence over `amplitude`.
    pub energy: Option<f64>,
    /// Peak scale of the unnormalized shape.
    pub amplitude: Option<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self { family: InitFamily::Gaussian, energy: None, amplitude: None, sigma: 1.0, seed: 0 }
    }
}

/// `‖Q‖²_{H^{s+1}} + ‖u‖²_{Hˢ}`.
pub fn initial_energy(state: &SpectralState, s: usize) -> f64 {
    sobolev_norm(&state.grid, &state.qhat, s + 1).powi(2) + sobolev_norm(&state.grid, &state.uhat, s).powi(2)
}

fn unit_vector<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let v: [f64; N] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.map(|x| x / n);
        }
    }
}

/// Build a dealiased initial state with solenoidal `û₀`, scaled to the
/// requested energy (Sobolev index `s`) or amplitude.
pub fn build_initial(grid: &GridSpec, spec: &InitSpec, s: usize) -> Result<SpectralState> {
    if !(spec.sigma.is_finite() && spec.sigma > 0.0) {
        return Err(Error::InvalidParams(format!("init sigma must be positive, got {}", spec.sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let fft = Transformer::new(grid.n);
    let mut state = SpectralState::zeros(*grid);
    match spec.family {
        InitFamily::Gaussian => {
            let qbar: [f64; 5] = unit_vector(&mut rng);
            let ubar: [f64; 3] = unit_vector(&mut rng);
            let l = grid.box_length;
            let sig2 = spec.sigma * spec.sigma;
            let env = |x: [f64; 3], shift: f64| {
                let d2: f64 = x
                    .iter()
                    .map(|&xi| {
                        let d = (xi - 0.5 * l - shift).rem_euclid(l);
                        let d = d.min(l - d);
                        d * d
                    })
                    .sum();
                (-d2 / (2.0 * sig2)).exp()
            };
            let q = RealField::from_fn(grid, 5, |c, x| qbar[c] * env(x, 0.0));
            let u = RealField::from_fn(grid, 3, |c, x| ubar[c] * env(x, 0.25 * l));
            state.qhat = fft.forward(&q)?;
            state.uhat = fft.forward(&u)?;
        }
        InitFamily::Random => {
            let k = grid.wavenumbers();
            let n = grid.n;
            for field in [&mut state.qhat, &mut state.uhat] {
                let ncomp = field.ncomp();
                for c in 0..ncomp {
                    for i1 in 0..n {
                        for i2 in 0..n {
                            for i3 in 0..n {
                                let k2 = k[i1] * k[i1] + k[i2] * k[i2] + k[i3] * k[i3];
                                let w = (-0.5 * spec.sigma * spec.sigma * k2).exp();
                                let re: f64 = rng.sample(StandardNormal);
                                let im: f64 = rng.sample(StandardNormal);
                                field.set(c, i1, i2, i3, Complex64::new(re, im) * w);
                            }
                        }
                    }
                }
                field.symmetrize();
            }
        }
        InitFamily::SingleMode => {
            let qbar = QTensor::basis(2).add(&QTensor::basis(0)).0;
            let k0 = grid.k0();
            let q = RealField::from_fn(grid, 5, |c, x| qbar[c] * (k0 * x[0]).cos());
            let u = RealField::from_fn(grid, 3, |c, x| if c == 1 { (k0 * x[0]).sin() } else { 0.0 });
            state.qhat = fft.forward(&q)?;
            state.uhat = fft.forward(&u)?;
        }
    }
    dealias(grid, &mut state.qhat);
    dealias(grid, &mut state.uhat);
    leray_project(grid, &mut state.uhat)?;

    let scale = match (spec.energy, spec.amplitude) {
        (None, Some(a)) => a,
        (target, _) => {
            let target = target.unwrap_or(DEFAULT_E0);
            if !(target.is_finite() && target >= 0.0) {
                return Err(Error::InvalidParams(format!("init energy must be nonnegative, got {target}")));
            }
            let e0 = initial_energy(&state, s);
            if e0 == 0.0 {
                return Err(Error::Degenerate("initial shape has zero energy".into()));
            }
            (target / e0).sqrt()
        }
    };
    state.qhat.scale(scale);
    state.uhat.scale(scale);
    Ok(state)
}
