use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridSpec, RealField, SpectralField};
use crate::error::{Error, Result};

/// Lines gathered per strided FFT batch.
const BLOCK: usize = 16;

/// 3D complex FFT on `n³` buffers, optionally pruned to a cubic band of modes.
///
/// With a band, [`Transformer::inverse_inplace`] assumes every coefficient
/// outside the band is zero and skips the lines that are identically zero;
/// [`Transformer::forward_inplace`] only finishes the lines needed for in-band
/// output and zeroes the rest.
#[derive(Clone)]
pub struct Transformer {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    active: Vec<usize>,
    mask: Vec<bool>,
    /// Maximal runs `(start, len)` of consecutive active indices.
    runs: Vec<(usize, usize)>,
    band: Option<usize>,
}

impl std::fmt::Debug for Transformer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transformer").field("n", &self.n).field("band", &self.band).finish()
    }
}

impl Transformer {
    /// Full (unpruned) transforms.
    pub fn new(n: usize) -> Self {
        Self::with_band(n, None)
    }

    /// Transforms pruned to the grid's dealiasing band.
    pub fn banded(grid: &GridSpec) -> Self {
        Self::with_band(grid.n, grid.keep_band())
    }

    pub fn with_band(n: usize, band: Option<usize>) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let band = band.filter(|&b| 2 * b + 1 < n);
        let mask: Vec<bool> = (0..n)
            .map(|i| match band {
                Some(b) => (if i < n / 2 { i } else { n - i }) <= b,
                None => true,
            })
            .collect();
        let active: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &i in &active {
            match runs.last_mut() {
                Some((s, l)) if *s + *l == i => *l += 1,
                _ => runs.push((i, 1)),
            }
        }
        Self { n, fwd, inv, active, mask, runs, band }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn band(&self) -> Option<usize> {
        self.band
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let want = self.n * self.n * self.n;
        if len != want {
            return Err(Error::DimensionMismatch { expected: want.to_string(), got: len.to_string() });
        }
        Ok(())
    }

    /// Unnormalized inverse transform `Σ_m c_m e^{+iξ·x}` in place.
    pub fn inverse_inplace(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let fft = self.inv.as_ref();
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut lines = vec![Complex64::default(); BLOCK * n];
        // Axis 1 only on in-band (i2, i3) columns, axis 2 only on in-band i3.
        for &i2 in &self.active {
            for &(c0, len) in &self.runs {
                self.axis_strided(fft, buf, i2 * n + c0, n * n, len, &mut lines, &mut scratch);
            }
        }
        for i1 in 0..n {
            for &(c0, len) in &self.runs {
                self.axis_strided(fft, buf, i1 * n * n + c0, n, len, &mut lines, &mut scratch);
            }
        }
        for line in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
    }

    /// Unnormalized forward transform `Σ_x f(x) e^{−iξ·x}` in place.
    pub fn forward_inplace(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let fft = self.fwd.as_ref();
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut lines = vec![Complex64::default(); BLOCK * n];
        for line in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
        for i1 in 0..n {
            for &(c0, len) in &self.runs {
                self.axis_strided(fft, buf, i1 * n * n + c0, n, len, &mut lines, &mut scratch);
            }
        }
        for &i2 in &self.active {
            for &(c0, len) in &self.runs {
                self.axis_strided(fft, buf, i2 * n + c0, n * n, len, &mut lines, &mut scratch);
            }
        }
        if self.band.is_some() {
            self.zero_out_of_band(buf);
        }
    }

    /// FFT along an axis with element stride `stride`, over `ncols` consecutive
    /// columns starting at `base`.
    #[allow(clippy::too_many_arguments)]
    fn axis_strided(
        &self,
        fft: &dyn Fft<f64>,
        buf: &mut [Complex64],
        base: usize,
        stride: usize,
        ncols: usize,
        lines: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let n = self.n;
        let mut c0 = 0;
        while c0 < ncols {
            let nb = BLOCK.min(ncols - c0);
            for j in 0..n {
                let row = base + j * stride + c0;
                for c in 0..nb {
                    lines[c * n + j] = buf[row + c];
                }
            }
            fft.process_with_scratch(&mut lines[..nb * n], scratch);
            for j in 0..n {
                let row = base + j * stride + c0;
                for c in 0..nb {
                    buf[row + c] = lines[c * n + j];
                }
            }
            c0 += nb;
        }
    }

    fn zero_out_of_band(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let zero = Complex64::default();
        for i1 in 0..n {
            for i2 in 0..n {
                let off = (i1 * n + i2) * n;
                if self.mask[i1] && self.mask[i2] {
                    for i3 in 0..n {
                        if !self.mask[i3] {
                            buf[off + i3] = zero;
                        }
                    }
                } else {
                    buf[off..off + n].fill(zero);
                }
            }
        }
    }

    /// Forward transform of one or two real components packed as `a + i b`.
    /// Outputs are normalized Fourier-series coefficients; modes outside the
    /// band are set to zero.
    pub fn forward_pair(&self, a: &[f64], b: Option<&[f64]>, out_a: &mut [Complex64], out_b: Option<&mut [Complex64]>) {
        let n = self.n;
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.forward_inplace(&mut buf);
        self.unpack(&buf, out_a, out_b);
        let _ = n;
    }

    /// Split a transformed packed buffer `FFT(a + ib)` into the normalized
    /// spectra of `a` and `b`.
    pub fn unpack(&self, buf: &[Complex64], out_a: &mut [Complex64], mut out_b: Option<&mut [Complex64]>) {
        let n = self.n;
        let s = 0.5 / (n * n * n) as f64;
        let neg = |i: usize| (n - i) % n;
        if self.band.is_some() {
            out_a.fill(Complex64::default());
            if let Some(ob) = out_b.as_deref_mut() {
                ob.fill(Complex64::default());
            }
        }
        for &i1 in &self.active {
            for &i2 in &self.active {
                let row = (i1 * n + i2) * n;
                let nrow = (neg(i1) * n + neg(i2)) * n;
                for &i3 in &self.active {
                    let z = buf[row + i3];
                    let zn = buf[nrow + neg(i3)].conj();
                    out_a[row + i3] = (z + zn) * s;
                    if let Some(ob) = out_b.as_deref_mut() {
                        let d = (z - zn) * s;
                        // d / i
                        ob[row + i3] = Complex64::new(d.im, -d.re);
                    }
                }
            }
        }
    }

    /// Inverse transform of one or two Hermitian spectra packed as `A + iB`.
    pub fn backward_pair(&self, a: &[Complex64], b: Option<&[Complex64]>, out_a: &mut [f64], out_b: Option<&mut [f64]>) {
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| x + Complex64::new(-y.im, y.re)).collect(),
            None => a.to_vec(),
        };
        self.inverse_inplace(&mut buf);
        for (o, v) in out_a.iter_mut().zip(&buf) {
            *o = v.re;
        }
        if let Some(ob) = out_b {
            for (o, v) in ob.iter_mut().zip(&buf) {
                *o = v.im;
            }
        }
    }

    /// Fourier-series coefficients of every component.
    pub fn forward(&self, f: &RealField) -> Result<SpectralField> {
        self.check_len(f.points())?;
        let n = f.n();
        let mut out = SpectralField::zeros(n, f.ncomp());
        let p = f.points();
        let mut c = 0;
        while c < f.ncomp() {
            if c + 1 < f.ncomp() {
                let (lo, hi) = out.data_mut()[c * p..(c + 2) * p].split_at_mut(p);
                self.forward_pair(f.comp(c), Some(f.comp(c + 1)), lo, Some(hi));
                c += 2;
            } else {
                self.forward_pair(f.comp(c), None, out.comp_mut(c), None);
                c += 1;
            }
        }
        Ok(out)
    }

    /// Real-space samples of every component (the imaginary part of a
    /// non-Hermitian input is discarded).
    pub fn backward(&self, s: &SpectralField) -> Result<RealField> {
        self.check_len(s.points())?;
        let n = s.n();
        let mut out = RealField::zeros(n, s.ncomp());
        let p = s.points();
        let mut c = 0;
        while c < s.ncomp() {
            if c + 1 < s.ncomp() {
                let (lo, hi) = out.data_mut()[c * p..(c + 2) * p].split_at_mut(p);
                self.backward_pair(s.comp(c), Some(s.comp(c + 1)), lo, Some(hi));
                c += 2;
            } else {
                let mut buf = s.comp(c).to_vec();
                self.inverse_inplace(&mut buf);
                for (o, v) in out.comp_mut(c).iter_mut().zip(&buf) {
                    *o = v.re;
                }
                c += 1;
            }
        }
        Ok(out)
    }
}
