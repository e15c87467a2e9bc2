use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    derivative, divergence, expand_complex, gradient, laplacian, leray_project, sobolev_norm, GridSpec, RealField,
    SpectralField, SpectralState, Transformer,
};
use crate::qtensor::{mat3, Mat3, QTensor};

/// Random real field whose modes satisfy `|m_i| ≤ band`, with amplitudes
/// `N(0,1)/(1+|m|²)`.
pub fn random_band_limited(grid: &GridSpec, ncomp: usize, band: usize, seed: u64) -> SpectralField {
    let n = grid.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(n, ncomp);
    for c in 0..ncomp {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let m = [grid.mode(i1), grid.mode(i2), grid.mode(i3)];
                    if m.iter().any(|v| v.unsigned_abs() as usize > band) {
                        continue;
                    }
                    let m2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    f.set(c, i1, i2, i3, Complex64::new(re, im) / (1.0 + m2));
                }
            }
        }
    }
    f.symmetrize();
    f
}

/// Random state with band-limited `Q̂` and solenoidal band-limited `û`.
pub fn random_state(grid: &GridSpec, band: usize, seed: u64) -> Result<SpectralState> {
    let mut st = SpectralState::zeros(*grid);
    st.qhat = random_band_limited(grid, 5, band, seed);
    st.uhat = random_band_limited(grid, 3, band, seed ^ 0x9e37_79b9_7f4a_7c15);
    leray_project(grid, &mut st.uhat)?;
    Ok(st)
}

fn max_mode(grid: &GridSpec, f: &SpectralField) -> usize {
    let n = grid.n;
    let mut worst = 0;
    for c in 0..f.ncomp() {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    if f.get(c, i1, i2, i3).norm() > 0.0 {
                        let m = [i1, i2, i3].map(|i| grid.mode(i).unsigned_abs() as usize);
                        worst = worst.max(m[0].max(m[1]).max(m[2]));
                    }
                }
            }
        }
    }
    worst
}

/// `L³ Σ_m Re(â_m conj(b̂_m))` over all components.
fn inner(grid: &GridSpec, a: &SpectralField, b: &SpectralField) -> f64 {
    grid.volume() * a.data().iter().zip(b.data()).map(|(x, y)| (x * y.conj()).re).sum::<f64>()
}

fn l2(grid: &GridSpec, f: &SpectralField) -> f64 {
    inner(grid, f, f).sqrt()
}

fn multi_indices(k: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=k {
        for b in 0..=(k - a) {
            out.push([a, b, k - a - b]);
        }
    }
    out
}

/// `Σ_{|α|=k} ‖∂^α(m g) − m ∂^α g‖²` for a real multiplier `m` and a scalar
/// spectral field `g`.
fn commutator_sq(grid: &GridSpec, fft: &Transformer, m: &RealField, g: &SpectralField, k: u32) -> Result<f64> {
    let times = |f: &SpectralField| -> Result<SpectralField> {
        let mut x = fft.backward(f)?;
        for (v, w) in x.data_mut().iter_mut().zip(m.data()) {
            *v *= w;
        }
        fft.forward(&x)
    };
    let prod = times(g)?;
    let mut acc = 0.0;
    for alpha in multi_indices(k) {
        let mut lhs = derivative(grid, &prod, alpha);
        let rhs = times(&derivative(grid, g, alpha))?;
        lhs.axpy(-1.0, &rhs);
        acc += l2(grid, &lhs).powi(2);
    }
    Ok(acc)
}

/// Ratios of the three commutator norms at order `k` to their Sobolev bounds:
///
/// ```text
/// ‖∂^k(ψ∇φ) − ψ∂^k∇φ‖ / (‖ψ‖_{Hˢ}‖φ‖_{H^{s+1}})
/// ‖∂^k(φ∇ψ) − φ∂^k∇ψ‖ / (‖ψ‖_{Hˢ}‖φ‖_{H^{s+1}})
/// ‖∂^k(φΔΦ) − φ∂^kΔΦ‖ / (‖φ‖_{H^{s+1}}‖Φ‖_{H^{s+1}})
/// ```
///
/// where `‖∂^k ·‖²` sums over `|α| = k`. Inputs are scalar fields with modes
/// `|m_i| < n/4`, so every product is resolved exactly on the grid.
pub fn commutator_ratio(
    grid: &GridSpec,
    psi: &SpectralField,
    phi: &SpectralField,
    big_phi: &SpectralField,
    k: u32,
    s: usize,
) -> Result<[f64; 3]> {
    for f in [psi, phi, big_phi] {
        f.check_shape(grid.n, 1)?;
        if 4 * max_mode(grid, f) >= grid.n {
            return Err(Error::InvalidParams(format!("commutator inputs must satisfy |m_i| < n/4 = {}", grid.n / 4)));
        }
    }
    if (k as usize) > s || s < 2 {
        return Err(Error::InvalidParams(format!("need k ≤ s and s ≥ 2, got k = {k}, s = {s}")));
    }
    let fft = Transformer::new(grid.n);
    let psi_x = fft.backward(psi)?;
    let phi_x = fft.backward(phi)?;
    let grad_phi = gradient(grid, phi);
    let grad_psi = gradient(grid, psi);
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let p = grid.points();
    for j in 0..3 {
        let gj = SpectralField::from_vec(grid.n, 1, grad_phi.data()[j * p..(j + 1) * p].to_vec())?;
        n1 += commutator_sq(grid, &fft, &psi_x, &gj, k)?;
        let gj = SpectralField::from_vec(grid.n, 1, grad_psi.data()[j * p..(j + 1) * p].to_vec())?;
        n2 += commutator_sq(grid, &fft, &phi_x, &gj, k)?;
    }
    let n3 = commutator_sq(grid, &fft, &phi_x, &laplacian(grid, big_phi), k)?;
    let d12 = sobolev_norm(grid, psi, s) * sobolev_norm(grid, phi, s + 1);
    let d3 = sobolev_norm(grid, phi, s + 1) * sobolev_norm(grid, big_phi, s + 1);
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num.sqrt() / den };
    Ok([ratio(n1, d12), ratio(n2, d12), ratio(n3, d3)])
}

/// `‖|Q|‖_{Hˢ} / ‖Q‖_{Hˢ}` with `|Q|` evaluated on the grid and transformed back.
pub fn modq_sobolev_ratio(grid: &GridSpec, q: &SpectralField, s: usize) -> Result<f64> {
    q.check_shape(grid.n, 5)?;
    let den = sobolev_norm(grid, q, s);
    if den == 0.0 {
        return Err(Error::Degenerate("‖Q‖_Hs is zero".into()));
    }
    let fft = Transformer::new(grid.n);
    let qx = fft.backward(q)?;
    let p = grid.points();
    let abs = RealField::from_vec(
        grid.n,
        1,
        (0..p).map(|i| (0..5).map(|c| qx.data()[c * p + i].powi(2)).sum::<f64>().sqrt()).collect(),
    )?;
    Ok(sobolev_norm(grid, &fft.forward(&abs)?, s) / den)
}

fn expand_field(grid: &GridSpec, q: &SpectralField) -> SpectralField {
    let p = grid.points();
    let mut out = SpectralField::zeros(grid.n, 9);
    for idx in 0..p {
        let m = expand_complex(std::array::from_fn(|c| q.data()[c * p + idx]));
        for a in 0..3 {
            for b in 0..3 {
                out.data_mut()[(3 * a + b) * p + idx] = m[a][b];
            }
        }
    }
    out
}

/// Normalized residuals of the five cancellation identities, with `G = Q`:
///
/// 1. `(u·∇u, u) = (u·∇Q, Q) = 0`
/// 2. `(QΩ − ΩQ, Q) = 0`
/// 3. `(u·∇Q, ΔQ) − (div(∇Q⊙∇Q), u) = 0`
/// 4. `(GΩ − ΩG, ΔQ) − (GΔQ − ΔQG, ∇u) = 0`
/// 5. `(|G|ΔQ, ∇u) − (|G|D, ΔQ) = 0`
///
/// Each residual is the absolute value of the left side divided by the sum
/// over its terms of the product of factor norms (0 when every term vanishes).
/// Integrands are formed on the grid and paired spectrally; identities 1 and 3
/// are exact when the inputs satisfy `|m_i| < n/3`.
pub fn cancellation_residuals(state: &SpectralState) -> Result<[f64; 5]> {
    let grid = &state.grid;
    let fft = Transformer::new(grid.n);
    let p = grid.points();
    let gu_hat = gradient(grid, &state.uhat);
    let gq_hat = gradient(grid, &state.qhat);
    let lq_hat = laplacian(grid, &state.qhat);
    let u = fft.backward(&state.uhat)?;
    let gu = fft.backward(&gu_hat)?;
    let q = fft.backward(&state.qhat)?;
    let gq = fft.backward(&gq_hat)?;
    let lq = fft.backward(&lq_hat)?;

    // Real-space integrands.
    let mut adv_u = RealField::zeros(grid.n, 3);
    let mut adv_q = RealField::zeros(grid.n, 5);
    let mut rot = RealField::zeros(grid.n, 9);
    let mut gg = RealField::zeros(grid.n, 9);
    let mut comm_l = RealField::zeros(grid.n, 9);
    let mut abs_l = RealField::zeros(grid.n, 9);
    let mut abs_d = RealField::zeros(grid.n, 9);
    let at = |f: &RealField, c: usize, i: usize| f.data()[c * p + i];
    for i in 0..p {
        let uv = [at(&u, 0, i), at(&u, 1, i), at(&u, 2, i)];
        let g: Mat3 = std::array::from_fn(|a| std::array::from_fn(|b| at(&gu, 3 * a + b, i)));
        for a in 0..3 {
            adv_u.data_mut()[a * p + i] = (0..3).map(|j| uv[j] * g[a][j]).sum();
        }
        for c in 0..5 {
            adv_q.data_mut()[c * p + i] = (0..3).map(|j| uv[j] * at(&gq, 3 * c + j, i)).sum();
        }
        let qv = QTensor(std::array::from_fn(|c| at(&q, c, i)));
        let m = qv.expand();
        let l = QTensor(std::array::from_fn(|c| at(&lq, c, i))).expand();
        let mut om = mat3::ZERO;
        let mut d = mat3::ZERO;
        for a in 0..3 {
            for b in 0..3 {
                om[a][b] = 0.5 * (g[a][b] - g[b][a]);
                d[a][b] = 0.5 * (g[a][b] + g[b][a]);
            }
        }
        let r = mat3::commutator(&m, &om);
        let cl = mat3::commutator(&m, &l);
        let norm = qv.norm();
        for a in 0..3 {
            for b in 0..3 {
                let k = 3 * a + b;
                rot.data_mut()[k * p + i] = r[a][b];
                gg.data_mut()[k * p + i] = (0..5).map(|c| at(&gq, 3 * c + a, i) * at(&gq, 3 * c + b, i)).sum();
                comm_l.data_mut()[k * p + i] = cl[a][b];
                abs_l.data_mut()[k * p + i] = norm * l[a][b];
                abs_d.data_mut()[k * p + i] = norm * d[a][b];
            }
        }
    }
    let adv_u = fft.forward(&adv_u)?;
    let adv_q = fft.forward(&adv_q)?;
    let rot = fft.forward(&rot)?;
    let div_gg = divergence(grid, &fft.forward(&gg)?)?;
    let comm_l = fft.forward(&comm_l)?;
    let abs_l = fft.forward(&abs_l)?;
    let abs_d = fft.forward(&abs_d)?;
    let qm = expand_field(grid, &state.qhat);
    let lm = expand_field(grid, &lq_hat);

    let resid = |terms: &[(f64, &SpectralField, &SpectralField)]| {
        let num: f64 = terms.iter().map(|(s, a, b)| s * inner(grid, a, b)).sum();
        let den: f64 = terms.iter().map(|(_, a, b)| l2(grid, a) * l2(grid, b)).sum();
        if den == 0.0 {
            0.0
        } else {
            num.abs() / den
        }
    };
    let r1 = {
        let a = resid(&[(1.0, &adv_u, &state.uhat)]);
        let b = resid(&[(1.0, &adv_q, &state.qhat)]);
        a.max(b)
    };
    Ok([
        r1,
        resid(&[(1.0, &rot, &qm)]),
        resid(&[(1.0, &adv_q, &lq_hat), (-1.0, &div_gg, &state.uhat)]),
        resid(&[(1.0, &rot, &lm), (-1.0, &comm_l, &gu_hat)]),
        resid(&[(1.0, &abs_l, &gu_hat), (-1.0, &abs_d, &lm)]),
    ])
}
