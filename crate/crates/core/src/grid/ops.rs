use rustfft::num_complex::Complex64;

use super::{GridSpec, SpectralField};
use crate::error::{Error, Result};
use crate::qtensor::QTensor;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Diagonal Fourier multipliers used by the pseudo-spectral assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecOp {
    Id,
    /// `∂_j`, multiplier `iξ_j`.
    D(usize),
    /// `∂_j∂_l`, multiplier `−ξ_jξ_l`.
    DD(usize, usize),
    /// `Δ`, multiplier `−|ξ|²`.
    Lap,
}

impl SpecOp {
    #[inline]
    pub fn multiplier(self, xi: [f64; 3]) -> Complex64 {
        match self {
            SpecOp::Id => Complex64::new(1.0, 0.0),
            SpecOp::D(j) => Complex64::new(0.0, xi[j]),
            SpecOp::DD(j, l) => Complex64::new(-xi[j] * xi[l], 0.0),
            SpecOp::Lap => Complex64::new(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0.0),
        }
    }
}

/// Calls `f(flat_index, ξ)` for every mode in storage order.
#[inline]
pub(crate) fn for_each_mode(grid: &GridSpec, mut f: impl FnMut(usize, [f64; 3])) {
    let k = grid.wavenumbers();
    let n = grid.n;
    let mut idx = 0;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                f(idx, [k[i1], k[i2], k[i3]]);
                idx += 1;
            }
        }
    }
}

/// `dst = op(src)` for one component.
pub fn apply_derivative(grid: &GridSpec, op: SpecOp, src: &[Complex64], dst: &mut [Complex64]) {
    for_each_mode(grid, |idx, xi| dst[idx] = src[idx] * op.multiplier(xi));
}

/// `∂^α f` on every component; multiplier `(iξ)^α`.
pub fn derivative(grid: &GridSpec, f: &SpectralField, alpha: [u32; 3]) -> SpectralField {
    let mut out = f.clone();
    let p = f.points();
    let order: u32 = alpha.iter().sum();
    let ipow = I.powu(order);
    for c in 0..f.ncomp() {
        let comp = &mut out.data_mut()[c * p..(c + 1) * p];
        for_each_mode(grid, |idx, xi| {
            let m = xi[0].powi(alpha[0] as i32) * xi[1].powi(alpha[1] as i32) * xi[2].powi(alpha[2] as i32);
            comp[idx] *= ipow * m;
        });
    }
    out
}

/// Gradient of every component; output component `3c + j` holds `∂_j f_c`.
pub fn gradient(grid: &GridSpec, f: &SpectralField) -> SpectralField {
    let p = f.points();
    let mut out = SpectralField::zeros(f.n(), 3 * f.ncomp());
    for c in 0..f.ncomp() {
        for j in 0..3 {
            let (src, dst) = (f.comp(c), &mut out.data_mut()[(3 * c + j) * p..(3 * c + j + 1) * p]);
            apply_derivative(grid, SpecOp::D(j), src, dst);
        }
    }
    out
}

pub fn laplacian(grid: &GridSpec, f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let p = f.points();
    for c in 0..f.ncomp() {
        apply_derivative(grid, SpecOp::Lap, f.comp(c), &mut out.data_mut()[c * p..(c + 1) * p]);
    }
    out
}

/// Row divergence `(div A)_i = ∂_j A_ij` of a field with `3m` components
/// stored row-major (`3i + j`); a vector field (`m = 1`) gives its scalar
/// divergence.
pub fn divergence(grid: &GridSpec, f: &SpectralField) -> Result<SpectralField> {
    if !f.ncomp().is_multiple_of(3) {
        return Err(Error::DimensionMismatch {
            expected: "a multiple of 3 components".into(),
            got: f.ncomp().to_string(),
        });
    }
    let rows = f.ncomp() / 3;
    let mut out = SpectralField::zeros(f.n(), rows);
    let p = f.points();
    for i in 0..rows {
        let dst = &mut out.data_mut()[i * p..(i + 1) * p];
        for_each_mode(grid, |idx, xi| {
            let mut acc = Complex64::default();
            for j in 0..3 {
                acc += f.comp(3 * i + j)[idx] * xi[j];
            }
            dst[idx] = acc * I;
        });
    }
    Ok(out)
}

/// `(I − ξξᵀ/|ξ|²) v` for one mode; the mean mode passes through.
#[inline]
pub(crate) fn project_mode(xi: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if k2 == 0.0 {
        return v;
    }
    let dot = (v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]) / k2;
    [v[0] - dot * xi[0], v[1] - dot * xi[1], v[2] - dot * xi[2]]
}

/// Leray projection of a 3-component field, in place.
pub fn leray_project(grid: &GridSpec, u: &mut SpectralField) -> Result<()> {
    u.check_shape(grid.n, 3)?;
    let p = u.points();
    let data = u.data_mut();
    for_each_mode(grid, |idx, xi| {
        let v = project_mode(xi, [data[idx], data[p + idx], data[2 * p + idx]]);
        data[idx] = v[0];
        data[p + idx] = v[1];
        data[2 * p + idx] = v[2];
    });
    Ok(())
}

/// Complex expansion of five spectral coefficients into a 3×3 matrix
/// (the basis map is real-linear, so real and imaginary parts expand separately).
#[inline]
pub(crate) fn expand_complex(q: [Complex64; 5]) -> [[Complex64; 3]; 3] {
    let re = QTensor(q.map(|v| v.re)).expand();
    let im = QTensor(q.map(|v| v.im)).expand();
    let mut m = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = Complex64::new(re[i][j], im[i][j]);
        }
    }
    m
}

/// Fourier coefficients of `P div Q`:
/// `σ̂_l = i Σ_j (δ_lj − ξ_lξ_j/|ξ|²) Σ_k Q̂_jk ξ_k`.
pub fn sigma_from_q(grid: &GridSpec, qhat: &SpectralField) -> Result<SpectralField> {
    qhat.check_shape(grid.n, 5)?;
    let p = qhat.points();
    let mut out = SpectralField::zeros(grid.n, 3);
    let data = out.data_mut();
    for_each_mode(grid, |idx, xi| {
        let m = expand_complex(std::array::from_fn(|c| qhat.data()[c * p + idx]));
        let div: [Complex64; 3] = std::array::from_fn(|j| (m[j][0] * xi[0] + m[j][1] * xi[1] + m[j][2] * xi[2]) * I);
        let v = project_mode(xi, div);
        data[idx] = v[0];
        data[p + idx] = v[1];
        data[2 * p + idx] = v[2];
    });
    Ok(out)
}

/// Zero every mode outside the dealiasing band, in place.
pub fn dealias(grid: &GridSpec, f: &mut SpectralField) {
    if grid.keep_band().is_none() {
        return;
    }
    let n = grid.n;
    let keep: Vec<bool> = (0..n).map(|i| grid.in_band(i)).collect();
    let p = f.points();
    let ncomp = f.ncomp();
    let data = f.data_mut();
    for i1 in 0..n {
        for i2 in 0..n {
            let row = keep[i1] && keep[i2];
            for i3 in 0..n {
                if !(row && keep[i3]) {
                    let idx = (i1 * n + i2) * n + i3;
                    for c in 0..ncomp {
                        data[c * p + idx] = Complex64::default();
                    }
                }
            }
        }
    }
}

/// Largest per-mode `|ξ·û|/(|ξ||û|)` over modes with `û ≠ 0`, `ξ ≠ 0`.
pub fn solenoidal_residual(grid: &GridSpec, u: &SpectralField) -> Result<f64> {
    u.check_shape(grid.n, 3)?;
    let p = u.points();
    let d = u.data();
    let mut worst: f64 = 0.0;
    for_each_mode(grid, |idx, xi| {
        let v = [d[idx], d[p + idx], d[2 * p + idx]];
        let norm = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
        let k = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if norm > 0.0 && k > 0.0 {
            let dot = (v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]).norm();
            worst = worst.max(dot / (k * norm));
        }
    });
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_norm, DealiasRule, RealField, Transformer};

    fn g(n: usize) -> GridSpec {
        GridSpec::periodic(n).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let grid = g(8);
        let t = Transformer::new(8);
        let f = t.forward(&RealField::from_fn(&grid, 1, |_, x| x[0].sin())).unwrap();
        let d = t.backward(&derivative(&grid, &f, [1, 0, 0])).unwrap();
        for i1 in 0..8 {
            let want = grid.coord(i1).cos();
            assert!((d.data()[d.index(0, i1, 3, 5)] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_of_mode_two() {
        let grid = g(8);
        let mut f = SpectralField::zeros(8, 1);
        f.set(0, 2, 0, 0, Complex64::new(1.0, 0.0));
        let l = laplacian(&grid, &f);
        assert_eq!(l.get(0, 2, 0, 0), Complex64::new(-4.0, 0.0));
    }

    #[test]
    fn derivative_norm_example() {
        let grid = g(16);
        let t = Transformer::new(16);
        let f = t.forward(&RealField::from_fn(&grid, 1, |_, x| (2.0 * x[0]).sin())).unwrap();
        let n = l2_norm(&grid, &derivative(&grid, &f, [1, 0, 0]));
        let want = 2.0 * ((2.0 * std::f64::consts::PI).powi(3) / 2.0).sqrt();
        assert!((n - want).abs() < 1e-12 * want);
        assert!((want - 22.2733).abs() < 1e-4);
    }

    #[test]
    fn leray_examples() {
        let grid = g(8);
        let mut u = SpectralField::zeros(8, 3);
        u.set(0, 0, 0, 1, Complex64::new(1.0, 0.0));
        u.set(0, 1, 0, 0, Complex64::new(1.0, 0.0));
        leray_project(&grid, &mut u).unwrap();
        assert_eq!(u.get(0, 0, 0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(u.get(0, 1, 0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn leray_kills_gradients_and_is_idempotent() {
        let grid = g(8);
        let mut phi = SpectralField::zeros(8, 1);
        phi.set(0, 1, 2, 3, Complex64::new(0.3, -0.2));
        phi.set(0, 7, 6, 5, Complex64::new(0.3, 0.2));
        let mut u = gradient(&grid, &phi);
        leray_project(&grid, &mut u).unwrap();
        assert!(u.data().iter().all(|v| v.norm() < 1e-14));

        let mut w = SpectralField::zeros(8, 3);
        for (i, v) in w.data_mut().iter_mut().enumerate() {
            *v = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        leray_project(&grid, &mut w).unwrap();
        let once = w.clone();
        leray_project(&grid, &mut w).unwrap();
        for (a, b) in once.data().iter().zip(w.data()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(solenoidal_residual(&grid, &w).unwrap() < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        let grid = g(8);
        let mut q = SpectralField::zeros(8, 5);
        // Q12 = Q21 = 1 is 1/√2·E3 scaled by √2.
        q.set(2, 1, 0, 0, Complex64::new(std::f64::consts::SQRT_2, 0.0));
        let s = sigma_from_q(&grid, &q).unwrap();
        assert!((s.get(1, 1, 0, 0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(s.get(0, 1, 0, 0).norm() < 1e-15 && s.get(2, 1, 0, 0).norm() < 1e-15);

        let mut q = SpectralField::zeros(8, 5);
        let u = QTensor::project(&[[2.0 / 3.0, 0.0, 0.0], [0.0, -1.0 / 3.0, 0.0], [0.0, 0.0, -1.0 / 3.0]]);
        for c in 0..5 {
            q.set(c, 1, 0, 0, Complex64::new(u.0[c], 0.0));
        }
        let s = sigma_from_q(&grid, &q).unwrap();
        assert!(s.data().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn dealias_rule_arithmetic() {
        let grid = GridSpec::new(32, 1.0, DealiasRule::TwoThirds).unwrap();
        let mut f = SpectralField::zeros(32, 1);
        f.set(0, 15, 0, 0, Complex64::new(1.0, 0.0));
        f.set(0, 1, 1, 1, Complex64::new(1.0, 0.0));
        dealias(&grid, &mut f);
        assert_eq!(f.get(0, 15, 0, 0), Complex64::default());
        assert_eq!(f.get(0, 1, 1, 1), Complex64::new(1.0, 0.0));
    }
}
