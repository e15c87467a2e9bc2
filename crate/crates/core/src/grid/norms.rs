use rustfft::num_complex::Complex64;

use super::ops::for_each_mode;
use super::{GridSpec, SpectralField};

/// `h_j(ξ₁², ξ₂², ξ₃²)` for `j = 0..=s`: the complete homogeneous symmetric
/// polynomials, i.e. `Σ_{|α|=j} |ξ^α|²`.
pub fn h_weights(xi: [f64; 3], s: usize) -> Vec<f64> {
    let mut out = vec![0.0; s + 1];
    h_weights_into(xi, &mut out);
    out
}

/// [`h_weights`] into a caller buffer of length `s + 1`, via
/// `h_j(x₁,x₂,x₃) = h_j(x₂,x₃) + x₁ h_{j−1}(x₁,x₂,x₃)`.
#[inline]
pub(crate) fn h_weights_into(xi: [f64; 3], out: &mut [f64]) {
    let x = xi.map(|v| v * v);
    // h_j(x3) = x3^j, then fold in x2 and x1 by the same recurrence.
    let mut p = 1.0;
    for o in out.iter_mut() {
        *o = p;
        p *= x[2];
    }
    for &xv in &[x[1], x[0]] {
        for j in 1..out.len() {
            out[j] += xv * out[j - 1];
        }
    }
}

/// `‖f‖_{L²} = (L³ Σ|c_m|²)^{1/2}` over all components.
pub fn l2_norm(grid: &GridSpec, f: &SpectralField) -> f64 {
    (grid.volume() * f.data().iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// `‖f‖_{Hˢ}` summed over multi-indices `|α| ≤ s`.
pub fn sobolev_norm(grid: &GridSpec, f: &SpectralField, s: usize) -> f64 {
    weighted(grid, f, |xi| h_weights(xi, s).iter().sum())
}

/// Homogeneous `‖f‖_{Ḣˢ}`, i.e. `(Σ_{|α|=s} ‖∂^α f‖²)^{1/2}`.
pub fn sobolev_seminorm(grid: &GridSpec, f: &SpectralField, s: usize) -> f64 {
    weighted(grid, f, |xi| h_weights(xi, s)[s])
}

fn weighted(grid: &GridSpec, f: &SpectralField, w: impl Fn([f64; 3]) -> f64) -> f64 {
    let p = f.points();
    let mut weights = vec![0.0; p];
    for_each_mode(grid, |idx, xi| weights[idx] = w(xi));
    let mut acc = 0.0;
    for c in 0..f.ncomp() {
        for (v, wt) in f.comp(c).iter().zip(&weights) {
            acc += v.norm_sqr() * wt;
        }
    }
    (grid.volume() * acc).sqrt()
}

/// Coefficients of the `ξ = 0` mode, one per component.
pub fn mean_mode(f: &SpectralField) -> Vec<Complex64> {
    (0..f.ncomp()).map(|c| f.comp(c)[0]).collect()
}

/// Table `T[p][k][j] = L³ Σ_m |c_m|² |ξ|^{2p} h_k h_j` for `p ≤ 2`,
/// `k, j ≤ kmax`, from which every `‖∂^k ∇^p f‖²_{H^r}` is a partial sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormMoments {
    kmax: usize,
    table: Vec<f64>,
}

impl NormMoments {
    pub fn new(grid: &GridSpec, f: &SpectralField, kmax: usize) -> Self {
        assert!(kmax < 16, "kmax must be below 16");
        let p = f.points();
        let w = kmax + 1;
        let mut table = vec![0.0; 3 * w * w];
        let mut power = vec![0.0; p];
        for c in 0..f.ncomp() {
            for (acc, v) in power.iter_mut().zip(f.comp(c)) {
                *acc += v.norm_sqr();
            }
        }
        let data = &power;
        for_each_mode(grid, |idx, xi| {
            let e = data[idx];
            if e == 0.0 {
                return;
            }
            let mut hb = [0.0; 16];
            let h = &mut hb[..w];
            h_weights_into(xi, h);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            let mut pw = e;
            for pp in 0..3 {
                for k in 0..w {
                    for j in 0..w {
                        table[(pp * w + k) * w + j] += pw * h[k] * h[j];
                    }
                }
                pw *= k2;
            }
        });
        for v in &mut table {
            *v *= grid.volume();
        }
        Self { kmax, table }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    #[inline]
    fn at(&self, p: usize, k: usize, j: usize) -> f64 {
        let w = self.kmax + 1;
        self.table[(p * w + k) * w + j]
    }

    /// `Σ_{|α|=k} ‖∂^α ∇^p f‖²_{H^r}`, where `∇^p` stands for `|ξ|^p`
    /// (`p = 1` gradient, `p = 2` Laplacian).
    pub fn sq(&self, p: usize, k: usize, r: usize) -> f64 {
        assert!(p <= 2 && k <= self.kmax && r <= self.kmax, "moment out of range");
        (0..=r).map(|j| self.at(p, k, j)).sum()
    }

    /// `Σ_{|α|=k} ‖∂^α f‖²_{L²}`.
    pub fn l2_sq(&self, k: usize) -> f64 {
        self.at(0, k, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{derivative, RealField, Transformer};
    use proptest::prelude::*;

    const VOL: f64 = 248.050_213_442_398_6; // (2π)³

    #[test]
    fn cosine_norms() {
        let grid = GridSpec::periodic(8).unwrap();
        let f = Transformer::new(8).forward(&RealField::from_fn(&grid, 1, |_, x| x[0].cos())).unwrap();
        assert!((l2_norm(&grid, &f) - (VOL / 2.0).sqrt()).abs() < 1e-12);
        assert!((l2_norm(&grid, &f) - 11.1366).abs() < 1e-4);
        assert!((sobolev_norm(&grid, &f, 1).powi(2) - VOL).abs() < 1e-10);
        assert_eq!(sobolev_norm(&grid, &SpectralField::zeros(8, 1), 3), 0.0);
    }

    #[test]
    fn h_weights_match_enumeration() {
        let xi = [0.3, -1.7, 2.2];
        let h = h_weights(xi, 4);
        for (j, hj) in h.iter().enumerate() {
            let mut want = 0.0;
            for a in 0..=j {
                for b in 0..=(j - a) {
                    let c = j - a - b;
                    want += (xi[0].powi(a as i32) * xi[1].powi(b as i32) * xi[2].powi(c as i32)).powi(2);
                }
            }
            assert!((hj - want).abs() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn moments_agree_with_derivative_sums() {
        let grid = GridSpec::periodic(8).unwrap();
        let f = Transformer::new(8)
            .forward(&RealField::from_fn(&grid, 2, |c, x| (x[0] + 2.0 * x[1]).sin() + c as f64 * (x[2] - x[0]).cos()))
            .unwrap();
        let m = NormMoments::new(&grid, &f, 3);
        // Σ_{|α|=2} ‖∂^α f‖² by explicit enumeration.
        let mut want = 0.0;
        for a in 0..=2u32 {
            for b in 0..=(2 - a) {
                want += l2_norm(&grid, &derivative(&grid, &f, [a, b, 2 - a - b])).powi(2);
            }
        }
        assert!((m.l2_sq(2) - want).abs() < 1e-10 * want);
        assert!((m.sq(0, 0, 3) - sobolev_norm(&grid, &f, 3).powi(2)).abs() < 1e-10 * m.sq(0, 0, 3));
    }

    proptest! {
        #[test]
        fn parseval_matches_quadrature(seed in 0u64..1000) {
            let grid = GridSpec::periodic(8).unwrap();
            let f = RealField::from_fn(&grid, 1, |_, x| {
                let s = seed as f64;
                (x[0] * 1.0 + s).sin() * (x[1] * 2.0 + 0.3 * s).cos() + 0.1 * (3.0 * x[2] - s).sin()
            });
            let spec = Transformer::new(8).forward(&f).unwrap();
            let a = l2_norm(&grid, &spec).powi(2);
            let b = f.l2_norm_sq(&grid);
            prop_assert!((a - b).abs() < 1e-10 * b);
        }

        #[test]
        fn dealias_never_increases_energy(seed in 0u64..1000) {
            let grid = GridSpec::periodic(8).unwrap();
            let mut f = SpectralField::zeros(8, 1);
            for (i, v) in f.data_mut().iter_mut().enumerate() {
                *v = Complex64::new(((i as u64 * 31 + seed) as f64).sin(), ((i as u64 * 17 + seed) as f64).cos());
            }
            let before = l2_norm(&grid, &f);
            crate::grid::dealias(&grid, &mut f);
            prop_assert!(l2_norm(&grid, &f) <= before);
        }
    }
}
