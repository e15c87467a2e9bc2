use std::sync::Mutex;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::assemble::{field_recipe, pointwise, NFIELDS};
use crate::error::Result;
use crate::grid::{project_mode, GridSpec, SpecOp, SpectralField, SpectralState, Transformer};
use crate::qtensor::PhysParams;

/// Fourier coefficients of the nonlinear forcing: `gq = −div f₁ + f₂`,
/// `gu = −P div f₃`, both dealiased.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearResidual {
    pub gq: SpectralField,
    pub gu: SpectralField,
}

impl NonlinearResidual {
    pub fn zeros(n: usize) -> Self {
        Self { gq: SpectralField::zeros(n, 5), gu: SpectralField::zeros(n, 3) }
    }
}

/// Pointwise outputs: 5 Q forcings followed by the 9 entries of f₃.
const NOUT: usize = 14;
/// Points per pointwise work unit; the product buffer is laid out as
/// `[chunk][output][point]`.
const CHUNK: usize = 4096;

/// Scratch reused across evaluations (large fresh allocations are dominated
/// by page faults at 64³).
#[derive(Debug, Default)]
struct Workspace {
    cbuf: Vec<Complex64>,
    prod: Vec<f64>,
}

/// Pseudo-spectral evaluator of [`NonlinearResidual`] with the transforms
/// pruned to the dealiasing band.
#[derive(Debug)]
pub struct NonlinearOperator {
    grid: GridSpec,
    params: PhysParams,
    fft: Transformer,
    /// In-band modes as `(index, ξ)`.
    band: Vec<(usize, [f64; 3])>,
    recipe: Vec<(usize, usize, SpecOp)>,
    ws: Mutex<Workspace>,
}

impl Clone for NonlinearOperator {
    fn clone(&self) -> Self {
        Self::new(self.grid, self.params)
    }
}

impl NonlinearOperator {
    pub fn new(grid: GridSpec, params: PhysParams) -> Self {
        let n = grid.n;
        let k = grid.wavenumbers();
        let mut band = Vec::new();
        for i1 in (0..n).filter(|&i| grid.in_band(i)) {
            for i2 in (0..n).filter(|&i| grid.in_band(i)) {
                for i3 in (0..n).filter(|&i| grid.in_band(i)) {
                    band.push(((i1 * n + i2) * n + i3, [k[i1], k[i2], k[i3]]));
                }
            }
        }
        Self {
            fft: Transformer::banded(&grid),
            band,
            recipe: field_recipe(),
            grid,
            params,
            ws: Mutex::new(Workspace::default()),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    /// Packed spectrum `op₁(f₁) + i·op₂(f₂)` restricted to the band.
    fn pack(&self, q: &SpectralField, u: &SpectralField, a: usize, b: Option<usize>, buf: &mut [Complex64]) {
        let src = |r: (usize, usize, SpecOp)| if r.0 == 0 { (q.comp(r.1), r.2) } else { (u.comp(r.1), r.2) };
        let (fa, oa) = src(self.recipe[a]);
        buf.fill(Complex64::default());
        for &(idx, xi) in &self.band {
            buf[idx] = fa[idx] * oa.multiplier(xi);
        }
        if let Some(b) = b {
            let (fb, ob) = src(self.recipe[b]);
            for &(idx, xi) in &self.band {
                let w = fb[idx] * ob.multiplier(xi);
                buf[idx] += Complex64::new(-w.im, w.re);
            }
        }
    }

    /// Evaluate the residual of `(Q̂, û)`.
    pub fn eval(&self, q: &SpectralField, u: &SpectralField) -> Result<NonlinearResidual> {
        let mut out = NonlinearResidual::zeros(self.grid.n);
        self.eval_into(q, u, &mut out)?;
        Ok(out)
    }

    /// Evaluate the residual of `(Q̂, û)` into `out`, reusing its storage.
    pub fn eval_into(&self, q: &SpectralField, u: &SpectralField, out: &mut NonlinearResidual) -> Result<()> {
        let n = self.grid.n;
        q.check_shape(n, 5)?;
        u.check_shape(n, 3)?;
        out.gq.check_shape(n, 5)?;
        out.gu.check_shape(n, 3)?;
        let p = self.grid.points();
        let mut guard = self.ws.lock().unwrap_or_else(|e| e.into_inner());
        let ws = &mut *guard;
        let npairs = NFIELDS.div_ceil(2);
        ws.cbuf.resize(npairs * p, Complex64::default());
        ws.prod.resize(NOUT * p, 0.0);

        // Backward transforms, two real fields per complex FFT: field 2k is the
        // real part of buffer k and field 2k + 1 its imaginary part.
        ws.cbuf.par_chunks_mut(p).take(npairs).enumerate().for_each(|(k, buf)| {
            let a = 2 * k;
            self.pack(q, u, a, (a + 1 < NFIELDS).then_some(a + 1), buf);
            self.fft.inverse_inplace(buf);
        });

        // Pointwise products.
        let params = self.params;
        let cbuf = &ws.cbuf;
        ws.prod.par_chunks_mut(NOUT * CHUNK).enumerate().for_each(|(c, out)| {
            let start = c * CHUNK;
            let len = out.len() / NOUT;
            for o in 0..len {
                let idx = start + o;
                let v: [f64; NFIELDS] = std::array::from_fn(|k| {
                    let z = cbuf[(k / 2) * p + idx];
                    if k % 2 == 0 {
                        z.re
                    } else {
                        z.im
                    }
                });
                let (rq, f3) = pointwise(&v, &params);
                for k in 0..5 {
                    out[k * len + o] = rq[k];
                }
                for k in 0..9 {
                    out[(5 + k) * len + o] = f3[k];
                }
            }
        });

        // Forward transforms, unpacked into normalized band-limited spectra.
        let prod = &ws.prod;
        let gather = |buf: &mut [Complex64], a: usize, b: Option<usize>| {
            for (c, chunk) in buf.chunks_mut(CHUNK).enumerate() {
                let len = chunk.len();
                let base = c * CHUNK * NOUT;
                let ra = &prod[base + a * len..base + (a + 1) * len];
                match b {
                    Some(b) => {
                        let rb = &prod[base + b * len..base + (b + 1) * len];
                        for ((z, &x), &y) in chunk.iter_mut().zip(ra).zip(rb) {
                            *z = Complex64::new(x, y);
                        }
                    }
                    None => {
                        for (z, &x) in chunk.iter_mut().zip(ra) {
                            *z = Complex64::new(x, 0.0);
                        }
                    }
                }
            }
        };
        // Output 13 (the last entry of f₃) rides with Q component 4.
        let fwd_pairs: [(usize, Option<usize>); 7] =
            [(0, Some(1)), (2, Some(3)), (4, Some(13)), (5, Some(6)), (7, Some(8)), (9, Some(10)), (11, Some(12))];
        let (gq, gu) = (&mut out.gq, &mut out.gu);
        let mut targets: Vec<(&mut [Complex64], Option<&mut [Complex64]>)> = Vec::with_capacity(7);
        let mut spec_f3 = std::mem::take(&mut ws.cbuf);
        {
            // f̂₃ spectra live in the first 9 slots of the complex scratch.
            let (f3_slots, rest) = spec_f3.split_at_mut(9 * p);
            let mut q_it = gq.data_mut().chunks_mut(p);
            let mut f_it = f3_slots.chunks_mut(p);
            let q0 = q_it.next().unwrap();
            let q1 = q_it.next().unwrap();
            targets.push((q0, Some(q1)));
            let q2 = q_it.next().unwrap();
            let q3 = q_it.next().unwrap();
            targets.push((q2, Some(q3)));
            let q4 = q_it.next().unwrap();
            let f8 = f_it.next_back().unwrap();
            targets.push((q4, Some(f8)));
            for _ in 0..4 {
                let x = f_it.next().unwrap();
                let y = f_it.next().unwrap();
                targets.push((x, Some(y)));
            }
            let bufs: Vec<&mut [Complex64]> = rest.chunks_mut(p).take(7).collect();
            targets.into_par_iter().zip(bufs).zip(fwd_pairs.par_iter()).for_each(|(((oa, ob), buf), &(a, b))| {
                gather(buf, a, b);
                self.fft.forward_inplace(buf);
                self.fft.unpack(buf, oa, ob);
            });
        }

        // gu = P(−i ξ_j f̂₃_ij).
        {
            let f3 = &spec_f3[..9 * p];
            let out = gu.data_mut();
            out.fill(Complex64::default());
            for &(idx, xi) in &self.band {
                let d: [Complex64; 3] = std::array::from_fn(|i| {
                    let s = f3[(3 * i) * p + idx] * xi[0] + f3[(3 * i + 1) * p + idx] * xi[1] + f3[(3 * i + 2) * p + idx] * xi[2];
                    Complex64::new(s.im, -s.re)
                });
                let v = project_mode(xi, d);
                for l in 0..3 {
                    out[l * p + idx] = v[l];
                }
            }
        }
        ws.cbuf = spec_f3;
        Ok(())
    }
}

/// One-shot residual of a state.
pub fn nonlinear_residual(state: &SpectralState, params: &PhysParams) -> Result<NonlinearResidual> {
    NonlinearOperator::new(state.grid, *params).eval(&state.qhat, &state.uhat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{assemble_f1, assemble_f2, assemble_f3, build_initial, InitFamily, InitSpec};
    use crate::grid::{dealias, divergence, leray_project, solenoidal_residual};

    fn params() -> PhysParams {
        PhysParams::new(1.0, 6.0, 1.0, 1.5, 0.7, 1.0, 1.0).unwrap()
    }

    fn random_state(n: usize, energy: f64, seed: u64) -> SpectralState {
        let grid = GridSpec::periodic(n).unwrap();
        let spec = InitSpec { family: InitFamily::Random, energy: Some(energy), amplitude: None, sigma: 0.5, seed };
        build_initial(&grid, &spec, 2).unwrap()
    }

    fn max_abs(f: &SpectralField) -> f64 {
        f.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_state_has_zero_residual() {
        let grid = GridSpec::periodic(8).unwrap();
        let r = nonlinear_residual(&SpectralState::zeros(grid), &params()).unwrap();
        assert_eq!(max_abs(&r.gq), 0.0);
        assert_eq!(max_abs(&r.gu), 0.0);
    }

    #[test]
    fn residual_is_at_least_quadratic() {
        let s = random_state(16, 1.0, 3);
        let p = params();
        let mut small = s.clone();
        small.qhat.scale(1e-3);
        small.uhat.scale(1e-3);
        let mut twice = small.clone();
        twice.qhat.scale(2.0);
        twice.uhat.scale(2.0);
        let r1 = nonlinear_residual(&small, &p).unwrap();
        let r2 = nonlinear_residual(&twice, &p).unwrap();
        for (a, b) in [(&r1.gq, &r2.gq), (&r1.gu, &r2.gu)] {
            let ratio = max_abs(b) / max_abs(a);
            assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn fast_path_matches_reference_assembly() {
        let s = random_state(16, 2.0, 11);
        let grid = s.grid;
        let p = params();
        let fft = Transformer::new(grid.n);
        let fast = nonlinear_residual(&s, &p).unwrap();

        // gq = −div f₁ + f₂ with f₁ block α holding u_α q.
        let f1 = fft.forward(&assemble_f1(&grid, &s).unwrap()).unwrap();
        let mut gq = fft.forward(&assemble_f2(&grid, &s, &p).unwrap()).unwrap();
        let k = grid.wavenumbers();
        let n = grid.n;
        let np = grid.points();
        for c in 0..5 {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let idx = (i1 * n + i2) * n + i3;
                        let xi = [k[i1], k[i2], k[i3]];
                        let mut acc = Complex64::default();
                        for a in 0..3 {
                            acc += f1.data()[(5 * a + c) * np + idx] * xi[a];
                        }
                        gq.data_mut()[c * np + idx] -= Complex64::new(-acc.im, acc.re);
                    }
                }
            }
        }
        dealias(&grid, &mut gq);

        let f3 = fft.forward(&assemble_f3(&grid, &s, &p).unwrap()).unwrap();
        let mut gu = divergence(&grid, &f3).unwrap();
        gu.scale(-1.0);
        leray_project(&grid, &mut gu).unwrap();
        dealias(&grid, &mut gu);

        let tol = 1e-12;
        assert!(max_diff(&fast.gq, &gq) <= tol * max_abs(&gq), "gq {}", max_diff(&fast.gq, &gq));
        assert!(max_diff(&fast.gu, &gu) <= tol * max_abs(&gu), "gu {}", max_diff(&fast.gu, &gu));
        assert!(solenoidal_residual(&grid, &fast.gu).unwrap() < 1e-12);
        assert!(fast.gq.hermitian_defect() < 1e-12 * max_abs(&gq));
    }

    #[test]
    fn uniform_velocity_only_advects() {
        // For constant u and Q = q̄ cos x₁ the only forcing on Q is −u₁ ∂₁Q.
        let grid = GridSpec::periodic(8).unwrap();
        let mut s = SpectralState::zeros(grid);
        s.uhat.set(0, 0, 0, 0, Complex64::new(0.5, 0.0));
        s.qhat.set(3, 1, 0, 0, Complex64::new(0.5, 0.0));
        s.qhat.set(3, 7, 0, 0, Complex64::new(0.5, 0.0));
        let mut p = params();
        p.b = 0.0;
        p.c = 0.0;
        p.lambda = 0.0;
        let r = nonlinear_residual(&s, &p).unwrap();
        // −0.5 ∂₁ cos x₁ = 0.5 sin x₁, i.e. ∓0.25i at m = ±1.
        assert!((r.gq.get(3, 1, 0, 0) - Complex64::new(0.0, -0.25)).norm() < 1e-15);
        assert!((r.gq.get(3, 7, 0, 0) - Complex64::new(0.0, 0.25)).norm() < 1e-15);
        let total: f64 = r.gq.data().iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 0.125).abs() < 1e-15);
    }
}
