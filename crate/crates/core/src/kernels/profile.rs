use serde::{Deserialize, Serialize};

use super::quadrature;
use crate::error::{Error, Result};

/// Radial shape of a Fourier profile `f̂(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileShape {
    /// `e^{−r²/(2σ²)}`
    Gaussian { sigma: f64 },
    /// `exp(1 − 1/(1 − (r/R)²))` on `r < R`, zero outside; peak value 1.
    Bump { radius: f64 },
}

/// Radial Fourier profile `f̂(r) = amplitude · r^p · shape(r)`.
///
/// Whole-space norms use `‖∂^k f‖²_{L²} = (2π)^{−3} ∫ |ξ|^{2k} |f̂|² dξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub shape: ProfileShape,
    pub amplitude: f64,
    #[serde(default)]
    pub r_power: u32,
}

/// `(2π)^{−3}·4π`, the radial measure factor.
pub(crate) const RADIAL_MEASURE: f64 = 4.0 * std::f64::consts::PI / 248.050_213_442_398_6;

/// `Γ(m + 1/2)`.
pub(crate) fn gamma_half(m: u32) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for j in 0..m {
        g *= j as f64 + 0.5;
    }
    g
}

impl RadialProfile {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        let p = Self { shape: ProfileShape::Gaussian { sigma }, amplitude, r_power: 0 };
        p.validate()?;
        Ok(p)
    }

    pub fn bump(amplitude: f64, radius: f64) -> Result<Self> {
        let p = Self { shape: ProfileShape::Bump { radius }, amplitude, r_power: 0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_r_power(mut self, r_power: u32) -> Self {
        self.r_power = r_power;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = match self.shape {
            ProfileShape::Gaussian { sigma } => sigma,
            ProfileShape::Bump { radius } => radius,
        };
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParams(format!("profile width must be positive, got {s}")));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParams("profile amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        let g = match self.shape {
            ProfileShape::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            ProfileShape::Bump { radius } => {
                let x = r / radius;
                if x < 1.0 {
                    (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        };
        self.amplitude * r.powi(self.r_power as i32) * g
    }

    /// Width parameter: `σ` for the Gaussian, `R/3` for the bump.
    pub fn scale(&self) -> f64 {
        match self.shape {
            ProfileShape::Gaussian { sigma } => sigma,
            ProfileShape::Bump { radius } => radius / 3.0,
        }
    }

    /// Upper end of the radial integration range; beyond it `|f̂|²` times any
    /// polynomial weight of degree ≤ 20 is below `e^{−100}` of its peak.
    pub fn r_max(&self) -> f64 {
        match self.shape {
            ProfileShape::Gaussian { sigma } => sigma * (150.0 + 4.0 * self.r_power as f64).sqrt(),
            ProfileShape::Bump { radius } => radius,
        }
    }

    /// `‖f‖_{L¹}` when it is known in closed form. A Gaussian `f̂` with
    /// `p = 0` is the transform of a positive function, so `‖f‖_{L¹} = f̂(0)`.
    pub fn l1_norm(&self) -> Option<f64> {
        match (self.shape, self.r_power) {
            (ProfileShape::Gaussian { .. }, 0) => Some(self.amplitude.abs()),
            _ => None,
        }
    }

    /// `sup |f̂|`, which never exceeds `‖f‖_{L¹}`.
    pub fn sup(&self) -> f64 {
        match self.shape {
            ProfileShape::Gaussian { sigma } => {
                let p = self.r_power as f64;
                if p == 0.0 {
                    self.amplitude.abs()
                } else {
                    let r = sigma * p.sqrt();
                    self.value(r).abs()
                }
            }
            ProfileShape::Bump { radius } => {
                if self.r_power == 0 {
                    self.amplitude.abs()
                } else {
                    (0..=4000).map(|i| self.value(radius * i as f64 / 4000.0).abs()).fold(0.0, f64::max)
                }
            }
        }
    }

    /// `‖f‖_{L¹}` if known, otherwise its lower bound `sup |f̂|`.
    pub fn l1_proxy(&self) -> f64 {
        self.l1_norm().unwrap_or_else(|| self.sup())
    }

    /// `‖∂^j f‖²_{L²}` (closed form for Gaussians, quadrature otherwise).
    pub fn derivative_norm_sq(&self, j: u32, tol: f64) -> Result<f64> {
        let m = j + self.r_power + 1;
        match self.shape {
            ProfileShape::Gaussian { sigma } => {
                let beta = 1.0 / (sigma * sigma);
                Ok(RADIAL_MEASURE * self.amplitude.powi(2) * gamma_half(m) / (2.0 * beta.powf(m as f64 + 0.5)))
            }
            ProfileShape::Bump { radius } => {
                let f = |r: f64| r.powi(2 * j as i32 + 2) * self.value(r).powi(2);
                let breaks: Vec<f64> = (0..=8).map(|i| radius * i as f64 / 8.0).collect();
                Ok(RADIAL_MEASURE * quadrature::integrate(f, &breaks, tol, quadrature::MAX_INTERVALS)?)
            }
        }
    }

    /// `‖f‖_{Hᵏ} = (Σ_{j≤k} ‖∂^j f‖²)^{1/2}`.
    pub fn hk_norm(&self, k: u32, tol: f64) -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..=k {
            acc += self.derivative_norm_sq(j, tol)?;
        }
        Ok(acc.sqrt())
    }

    /// `‖f‖_{L¹∩Hᵏ} = ‖f‖_{L¹} + ‖f‖_{Hᵏ}`, with [`RadialProfile::l1_proxy`]
    /// standing in for the `L¹` part.
    pub fn l1_hk_norm(&self, k: u32, tol: f64) -> Result<f64> {
        Ok(self.l1_proxy() + self.hk_norm(k, tol)?)
    }
}
