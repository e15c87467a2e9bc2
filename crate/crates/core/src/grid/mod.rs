//! Periodic pseudo-spectral machinery on an `n³` torus of side `L`.
//!
//! Spectral coefficients follow the Fourier-series convention
//! `f(x) = Σ_m c_m e^{iξ·x}`, `ξ = (2π/L) m`, with `m ∈ [−n/2, n/2)` per axis.
//! Storage is component-major, then `(i1, i2, i3)` with `i3` fastest, where
//! array index `i` holds mode `m = i` for `i < n/2` and `m = i − n` otherwise.

mod fft;
mod norms;
mod ops;

pub use fft::Transformer;
pub use norms::{h_weights, l2_norm, mean_mode, sobolev_norm, sobolev_seminorm, NormMoments};
pub use ops::{
    apply_derivative, dealias, derivative, divergence, gradient, laplacian, leray_project, sigma_from_q,
    solenoidal_residual, SpecOp,
};
pub(crate) use ops::{expand_complex, project_mode};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasRule {
    TwoThirds,
    Half,
    None,
}

impl DealiasRule {
    pub fn code(self) -> u8 {
        match self {
            DealiasRule::None => 0,
            DealiasRule::TwoThirds => 1,
            DealiasRule::Half => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(DealiasRule::None),
            1 => Some(DealiasRule::TwoThirds),
            2 => Some(DealiasRule::Half),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub box_length: f64,
    pub dealias: DealiasRule,
}

impl GridSpec {
    pub fn new(n: usize, box_length: f64, dealias: DealiasRule) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even and at least 8, got {n}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { n, box_length, dealias })
    }

    /// `2π`-periodic box with the two-thirds rule.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * std::f64::consts::PI, DealiasRule::TwoThirds)
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Grid spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Signed integer mode of array index `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Array index of mode `−m` given the index of `m`.
    #[inline]
    pub fn neg_index(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Wavenumbers used by every derivative multiplier: `(2π/L) m` with the
    /// Nyquist entry (`m = −n/2`) zeroed.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let k0 = self.k0();
        (0..self.n)
            .map(|i| if i == self.n / 2 { 0.0 } else { k0 * self.mode(i) as f64 })
            .collect()
    }

    /// Integer modes with the Nyquist entry zeroed, matching [`GridSpec::wavenumbers`].
    pub fn int_modes(&self) -> Vec<i64> {
        (0..self.n).map(|i| if i == self.n / 2 { 0 } else { self.mode(i) }).collect()
    }

    /// Largest `|m|` kept by the dealiasing rule, or `None` if every mode is kept.
    pub fn keep_band(&self) -> Option<usize> {
        match self.dealias {
            DealiasRule::TwoThirds => Some(self.n / 3),
            DealiasRule::Half => Some(self.n / 4),
            DealiasRule::None => None,
        }
    }

    /// Whether the index lies within the dealiasing band.
    #[inline]
    pub fn in_band(&self, i: usize) -> bool {
        match self.keep_band() {
            Some(b) => self.mode(i).unsigned_abs() as usize <= b,
            None => true,
        }
    }

    /// Physical coordinate of grid index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}

/// Complex Fourier coefficients of a multi-component real field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    ncomp: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize, ncomp: usize) -> Self {
        Self { n, ncomp, data: vec![Complex64::new(0.0, 0.0); ncomp * n * n * n] }
    }

    pub fn from_vec(n: usize, ncomp: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != ncomp * n * n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{ncomp}×{n}³ = {}", ncomp * n * n * n),
                got: data.len().to_string(),
            });
        }
        Ok(Self { n, ncomp, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn index(&self, c: usize, i1: usize, i2: usize, i3: usize) -> usize {
        ((c * self.n + i1) * self.n + i2) * self.n + i3
    }

    #[inline]
    pub fn get(&self, c: usize, i1: usize, i2: usize, i3: usize) -> Complex64 {
        self.data[self.index(c, i1, i2, i3)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, i1: usize, i2: usize, i3: usize, v: Complex64) {
        let idx = self.index(c, i1, i2, i3);
        self.data[idx] = v;
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let p = self.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let p = self.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn check_shape(&self, n: usize, ncomp: usize) -> Result<()> {
        if self.n != n || self.ncomp != ncomp {
            return Err(Error::DimensionMismatch {
                expected: format!("{ncomp} components on {n}³"),
                got: format!("{} components on {}³", self.ncomp, self.n),
            });
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest deviation from Hermitian symmetry `c_{−m} = conj(c_m)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let neg = |i: usize| (n - i) % n;
        let mut worst: f64 = 0.0;
        for c in 0..self.ncomp {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let a = self.get(c, i1, i2, i3);
                        let b = self.get(c, neg(i1), neg(i2), neg(i3));
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Overwrite with the Hermitian part `(c_m + conj(c_{−m}))/2`.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        let neg = |i: usize| (n - i) % n;
        let src = self.data.clone();
        for c in 0..self.ncomp {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let a = src[self.index(c, i1, i2, i3)];
                        let b = src[self.index(c, neg(i1), neg(i2), neg(i3))];
                        let idx = self.index(c, i1, i2, i3);
                        self.data[idx] = (a + b.conj()) * 0.5;
                    }
                }
            }
        }
    }
}

/// Real-space samples of a multi-component field on the `n³` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    n: usize,
    ncomp: usize,
    data: Vec<f64>,
}

impl RealField {
    pub fn zeros(n: usize, ncomp: usize) -> Self {
        Self { n, ncomp, data: vec![0.0; ncomp * n * n * n] }
    }

    pub fn from_vec(n: usize, ncomp: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != ncomp * n * n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{ncomp}×{n}³ = {}", ncomp * n * n * n),
                got: data.len().to_string(),
            });
        }
        Ok(Self { n, ncomp, data })
    }

    /// Sample `f(c, x)` at every grid point.
    pub fn from_fn(grid: &GridSpec, ncomp: usize, mut f: impl FnMut(usize, [f64; 3]) -> f64) -> Self {
        let n = grid.n;
        let mut out = Self::zeros(n, ncomp);
        for c in 0..ncomp {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let x = [grid.coord(i1), grid.coord(i2), grid.coord(i3)];
                        let idx = out.index(c, i1, i2, i3);
                        out.data[idx] = f(c, x);
                    }
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn index(&self, c: usize, i1: usize, i2: usize, i3: usize) -> usize {
        ((c * self.n + i1) * self.n + i2) * self.n + i3
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let p = self.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `‖f‖²_{L²}` by the rectangle rule, which is exact for trigonometric
    /// polynomials resolved by the grid.
    pub fn l2_norm_sq(&self, grid: &GridSpec) -> f64 {
        let w = grid.volume() / grid.points() as f64;
        self.data.iter().map(|v| v * v).sum::<f64>() * w
    }

    /// Pointwise maximum of the Euclidean norm across components.
    pub fn max_pointwise_norm(&self) -> f64 {
        let p = self.points();
        (0..p)
            .map(|i| (0..self.ncomp).map(|c| self.data[c * p + i].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Fourier coefficients of `(Q, u)` and the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub grid: GridSpec,
    /// Five S₀³ components.
    pub qhat: SpectralField,
    /// Three velocity components.
    pub uhat: SpectralField,
    pub t: f64,
}

impl SpectralState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, qhat: SpectralField::zeros(grid.n, 5), uhat: SpectralField::zeros(grid.n, 3), t: 0.0 }
    }

    pub fn new(grid: GridSpec, qhat: SpectralField, uhat: SpectralField, t: f64) -> Result<Self> {
        qhat.check_shape(grid.n, 5)?;
        uhat.check_shape(grid.n, 3)?;
        Ok(Self { grid, qhat, uhat, t })
    }

    pub fn is_finite(&self) -> bool {
        self.qhat.is_finite() && self.uhat.is_finite()
    }

    /// `self += s · other` on both fields (time untouched).
    pub fn axpy(&mut self, s: f64, other: &SpectralState) {
        self.qhat.axpy(s, &other.qhat);
        self.uhat.axpy(s, &other.uhat);
    }

    /// Largest absolute coefficient difference across both fields.
    pub fn max_abs_diff(&self, other: &SpectralState) -> f64 {
        self.qhat
            .data()
            .iter()
            .zip(other.qhat.data())
            .chain(self.uhat.data().iter().zip(other.uhat.data()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute coefficient magnitude across both fields.
    pub fn max_abs(&self) -> f64 {
        self.qhat.data().iter().chain(self.uhat.data()).map(|v| v.norm()).fold(0.0, f64::max)
    }
}
