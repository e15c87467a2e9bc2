//! Pointwise nonlinear terms
//!
//! ```text
//! f₁ = u ⊗ Q
//! f₂ = ΩQ − QΩ + λ|Q|D + bΓ[Q² − Tr(Q²)/3 I] − cΓ Q Tr(Q²)
//! f₃ = u⊗u + ∇Q⊙∇Q − QΔQ + ΔQ Q + λ|Q| H[Q]
//! ```
//!
//! with `(∇u)_ij = ∂_j u_i`, `Ω = (∇u − ∇uᵀ)/2`, `D = (∇u + ∇uᵀ)/2`,
//! `(∇Q⊙∇Q)_αβ = ∂_βQ : ∂_αQ` and row divergence `(div A)_i = ∂_j A_ij`.

use crate::error::Result;
use crate::grid::{GridSpec, RealField, SpecOp, SpectralField, SpectralState, Transformer};
use crate::qtensor::{bulk_field, mat3, traceless_square, Mat3, PhysParams, QTensor};

/// Number of real fields sampled per point for the nonlinear terms.
pub(crate) const NFIELDS: usize = 37;
pub(crate) const OFF_Q: usize = 0;
pub(crate) const OFF_U: usize = 5;
/// `8 + 3i + j` holds `∂_j u_i`.
pub(crate) const OFF_GU: usize = 8;
/// `17 + 3c + j` holds `∂_j q_c`.
pub(crate) const OFF_GQ: usize = 17;
pub(crate) const OFF_LQ: usize = 32;

/// Spectral recipe of the sampled fields: `(source, component, operator)`
/// with source 0 = Q̂, 1 = û.
pub(crate) fn field_recipe() -> Vec<(usize, usize, SpecOp)> {
    let mut r = Vec::with_capacity(NFIELDS);
    for c in 0..5 {
        r.push((0, c, SpecOp::Id));
    }
    for i in 0..3 {
        r.push((1, i, SpecOp::Id));
    }
    for i in 0..3 {
        for j in 0..3 {
            r.push((1, i, SpecOp::D(j)));
        }
    }
    for c in 0..5 {
        for j in 0..3 {
            r.push((0, c, SpecOp::D(j)));
        }
    }
    for c in 0..5 {
        r.push((0, c, SpecOp::Lap));
    }
    r
}

/// `f₂` at one point.
#[inline]
pub fn f2_point(q: &QTensor, grad_u: &Mat3, p: &PhysParams) -> QTensor {
    let m = q.expand();
    let mut omega = mat3::ZERO;
    let mut d = mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            omega[i][j] = 0.5 * (grad_u[i][j] - grad_u[j][i]);
            d[i][j] = 0.5 * (grad_u[i][j] + grad_u[j][i]);
        }
    }
    let rot = QTensor::project(&mat3::commutator(&omega, &m));
    let strain = QTensor::project(&d);
    let sq = traceless_square(q);
    let norm = q.norm();
    let cubic = p.c * q.tr_sq();
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = rot.0[k] + p.lambda * norm * strain.0[k] + p.gamma * (p.b * sq.0[k] - cubic * q.0[k]);
    }
    QTensor(out)
}

/// `f₃` at one point; `grad_q[c][j] = ∂_j q_c`.
#[inline]
pub fn f3_point(u: &[f64; 3], q: &QTensor, grad_q: &[[f64; 3]; 5], lap_q: &QTensor, p: &PhysParams) -> Mat3 {
    let m = q.expand();
    let l = lap_q.expand();
    let h = bulk_field(q, p).add(lap_q).expand();
    let norm = q.norm();
    let comm = mat3::commutator(&l, &m);
    let mut out = mat3::ZERO;
    for a in 0..3 {
        for b in 0..3 {
            let mut gg = 0.0;
            for gc in grad_q {
                gg += gc[a] * gc[b];
            }
            out[a][b] = u[a] * u[b] + gg + comm[a][b] + p.lambda * norm * h[a][b];
        }
    }
    out
}

/// Right-hand sides at one point from the sampled fields: the Q forcing
/// `−(u·∇Q + (div u)Q) + f₂` (which is `−div f₁ + f₂`) and `f₃` row-major.
///
/// Same algebra as [`f2_point`] and [`f3_point`], written out on the
/// independent entries of the symmetric and antisymmetric factors.
#[inline]
pub(crate) fn pointwise(v: &[f64; NFIELDS], p: &PhysParams) -> ([f64; 5], [f64; 9]) {
    const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;
    const R6: f64 = 0.408_248_290_463_863_016_366_214_012_450_981_66;
    const S2: f64 = std::f64::consts::SQRT_2;
    let q: [f64; 5] = std::array::from_fn(|c| v[OFF_Q + c]);
    let u: [f64; 3] = std::array::from_fn(|i| v[OFF_U + i]);
    let g: [f64; 9] = std::array::from_fn(|k| v[OFF_GU + k]);
    let lq: [f64; 5] = std::array::from_fn(|c| v[OFF_LQ + c]);

    let expand = |q: &[f64; 5]| {
        let m11 = q[0] * R2 - q[1] * R6;
        let m22 = -q[0] * R2 - q[1] * R6;
        [m11, m22, -(m11 + m22), q[2] * R2, q[3] * R2, q[4] * R2]
    };
    // Entries ordered (11, 22, 33, 12, 13, 23).
    let [m11, m22, m33, m12, m13, m23] = expand(&q);

    // P = ΩM; ΩM − MΩ = P + Pᵀ.
    let w12 = 0.5 * (g[1] - g[3]);
    let w13 = 0.5 * (g[2] - g[6]);
    let w23 = 0.5 * (g[5] - g[7]);
    let p11 = w12 * m12 + w13 * m13;
    let p22 = -w12 * m12 + w23 * m23;
    let p33 = -w13 * m13 - w23 * m23;
    let p12 = w12 * m22 + w13 * m23;
    let p21 = -w12 * m11 + w23 * m13;
    let p13 = w12 * m23 + w13 * m33;
    let p31 = -w13 * m11 - w23 * m12;
    let p23 = -w12 * m13 + w23 * m33;
    let p32 = -w13 * m12 - w23 * m22;
    let rot = [
        2.0 * (p11 - p22) * R2,
        2.0 * (2.0 * p33 - p11 - p22) * R6,
        2.0 * (p12 + p21) * R2,
        2.0 * (p13 + p31) * R2,
        2.0 * (p23 + p32) * R2,
    ];
    let strain = [
        (g[0] - g[4]) * R2,
        (2.0 * g[8] - g[0] - g[4]) * R6,
        (g[1] + g[3]) * R2,
        (g[2] + g[6]) * R2,
        (g[5] + g[7]) * R2,
    ];
    let s11 = m11 * m11 + m12 * m12 + m13 * m13;
    let s22 = m12 * m12 + m22 * m22 + m23 * m23;
    let s33 = m13 * m13 + m23 * m23 + m33 * m33;
    let s12 = m11 * m12 + m12 * m22 + m13 * m23;
    let s13 = m11 * m13 + m12 * m23 + m13 * m33;
    let s23 = m12 * m13 + m22 * m23 + m23 * m33;
    let sq = [(s11 - s22) * R2, (2.0 * s33 - s11 - s22) * R6, S2 * s12, S2 * s13, S2 * s23];
    let trsq = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3] + q[4] * q[4];
    let norm = trsq.sqrt();
    let ln = p.lambda * norm;
    let div_u = g[0] + g[4] + g[8];
    let bulk_q = -p.a - p.c * trsq;
    let mut rq = [0.0; 5];
    let mut hq = [0.0; 5];
    for c in 0..5 {
        let gq = &v[OFF_GQ + 3 * c..OFF_GQ + 3 * c + 3];
        let adv = u[0] * gq[0] + u[1] * gq[1] + u[2] * gq[2] + div_u * q[c];
        rq[c] = rot[c] + ln * strain[c] + p.gamma * (p.b * sq[c] - p.c * trsq * q[c]) - adv;
        hq[c] = lq[c] + bulk_q * q[c] + p.b * sq[c];
    }

    // ΔQ Q − Q ΔQ is antisymmetric: only the upper entries of LM − (LM)ᵀ.
    let [l11, l22, l33, l12, l13, l23] = expand(&lq);
    let c12 = (l11 * m12 + l12 * m22 + l13 * m23) - (l12 * m11 + l22 * m12 + l23 * m13);
    let c13 = (l11 * m13 + l12 * m23 + l13 * m33) - (l13 * m11 + l23 * m12 + l33 * m13);
    let c23 = (l12 * m13 + l22 * m23 + l23 * m33) - (l13 * m12 + l23 * m22 + l33 * m23);
    let [h11, h22, h33, h12, h13, h23] = expand(&hq);

    let mut gg = [0.0; 6];
    for c in 0..5 {
        let d = &v[OFF_GQ + 3 * c..OFF_GQ + 3 * c + 3];
        gg[0] += d[0] * d[0];
        gg[1] += d[1] * d[1];
        gg[2] += d[2] * d[2];
        gg[3] += d[0] * d[1];
        gg[4] += d[0] * d[2];
        gg[5] += d[1] * d[2];
    }
    let sym = |uu: f64, gg: f64, h: f64| uu + gg + ln * h;
    let e12 = sym(u[0] * u[1], gg[3], h12);
    let e13 = sym(u[0] * u[2], gg[4], h13);
    let e23 = sym(u[1] * u[2], gg[5], h23);
    let f3 = [
        sym(u[0] * u[0], gg[0], h11),
        e12 + c12,
        e13 + c13,
        e12 - c12,
        sym(u[1] * u[1], gg[1], h22),
        e23 + c23,
        e13 - c13,
        e23 - c23,
        sym(u[2] * u[2], gg[2], h33),
    ];
    (rq, f3)
}

/// Real-space samples of `Q, u, ∇u, ∇Q, ΔQ` (unpruned transforms, no dealiasing).
pub fn sample_fields(grid: &GridSpec, state: &SpectralState) -> Result<RealField> {
    let t = Transformer::new(grid.n);
    let recipe = field_recipe();
    let mut spec = SpectralField::zeros(grid.n, NFIELDS);
    let p = grid.points();
    for (k, &(src, comp, op)) in recipe.iter().enumerate() {
        let f = if src == 0 { state.qhat.comp(comp) } else { state.uhat.comp(comp) };
        crate::grid::apply_derivative(grid, op, f, &mut spec.data_mut()[k * p..(k + 1) * p]);
    }
    t.backward(&spec)
}

fn gather(fields: &RealField, idx: usize) -> [f64; NFIELDS] {
    let p = fields.points();
    std::array::from_fn(|k| fields.data()[k * p + idx])
}

/// `f₁ = u⊗Q` sampled on the grid; component `5α + c` holds `u_α q_c`, so
/// that `∂_α` of block `α` summed over `α` is `div f₁` in the Q basis.
pub fn assemble_f1(grid: &GridSpec, state: &SpectralState) -> Result<RealField> {
    let fields = sample_fields(grid, state)?;
    let p = grid.points();
    let mut out = RealField::zeros(grid.n, 15);
    for idx in 0..p {
        let v = gather(&fields, idx);
        for a in 0..3 {
            for c in 0..5 {
                out.data_mut()[(5 * a + c) * p + idx] = v[OFF_U + a] * v[OFF_Q + c];
            }
        }
    }
    Ok(out)
}

/// `f₂` sampled on the grid (five Q-basis components).
pub fn assemble_f2(grid: &GridSpec, state: &SpectralState, params: &PhysParams) -> Result<RealField> {
    let fields = sample_fields(grid, state)?;
    let p = grid.points();
    let mut out = RealField::zeros(grid.n, 5);
    for idx in 0..p {
        let v = gather(&fields, idx);
        let q = QTensor(std::array::from_fn(|c| v[OFF_Q + c]));
        let gu: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| v[OFF_GU + 3 * i + j]));
        let f2 = f2_point(&q, &gu, params);
        for c in 0..5 {
            out.data_mut()[c * p + idx] = f2.0[c];
        }
    }
    Ok(out)
}

/// `f₃` sampled on the grid (nine components, row-major).
pub fn assemble_f3(grid: &GridSpec, state: &SpectralState, params: &PhysParams) -> Result<RealField> {
    let fields = sample_fields(grid, state)?;
    let p = grid.points();
    let mut out = RealField::zeros(grid.n, 9);
    for idx in 0..p {
        let v = gather(&fields, idx);
        let q = QTensor(std::array::from_fn(|c| v[OFF_Q + c]));
        let u: [f64; 3] = std::array::from_fn(|i| v[OFF_U + i]);
        let gq: [[f64; 3]; 5] = std::array::from_fn(|c| std::array::from_fn(|j| v[OFF_GQ + 3 * c + j]));
        let lq = QTensor(std::array::from_fn(|c| v[OFF_LQ + c]));
        let f3 = f3_point(&u, &q, &gq, &lq, params);
        for a in 0..3 {
            for b in 0..3 {
                out.data_mut()[(3 * a + b) * p + idx] = f3[a][b];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtensor::molecular_field;

    fn p161() -> PhysParams {
        PhysParams::new(1.0, 6.0, 1.0, 1.0, 0.7, 1.0, 1.0).unwrap()
    }

    #[test]
    fn f2_constant_uniaxial() {
        let q = QTensor::uniaxial(1.0, [0.0, 0.0, 1.0]);
        let f2 = f2_point(&q, &mat3::ZERO, &p161());
        let want = QTensor::project(&[[-1.0 / 3.0, 0.0, 0.0], [0.0, -1.0 / 3.0, 0.0], [0.0, 0.0, 2.0 / 3.0]]).scale(4.0 / 3.0);
        for k in 0..5 {
            assert!((f2.0[k] - want.0[k]).abs() < 1e-14);
        }
        assert_eq!(f2_point(&QTensor::ZERO, &[[0.3, 1.0, 0.0], [0.0, 0.0, 2.0], [0.1, 0.0, -0.3]], &p161()), QTensor::ZERO);
    }

    #[test]
    fn f2_rigid_rotation_commutator() {
        // u = ω × x with ω = (0, 0, 1): ∇u = [[0,−1,0],[1,0,0],[0,0,0]], Ω = ∇u, D = 0.
        let gu = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let m = [[0.2, 0.1, 0.0], [0.1, -0.5, 0.3], [0.0, 0.3, 0.3]];
        let q = QTensor::reduce(&m).unwrap();
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let f2 = f2_point(&q, &gu, &p);
        let mut p0 = p;
        p0.c = 0.0;
        // ΩQ − QΩ by hand: ΩQ rows = (−Q₂·, Q₁·, 0), QΩ columns = (Q·₂, −Q·₁, 0).
        let om_q = [[-0.1, 0.5, -0.3], [0.2, 0.1, 0.0], [0.0, 0.0, 0.0]];
        let q_om = [[0.1, -0.2, 0.0], [-0.5, -0.1, 0.0], [0.3, 0.0, 0.0]];
        let want = QTensor::project(&mat3::sub(&om_q, &q_om));
        let cubic = q.scale(-p.c * p.gamma * q.tr_sq());
        let got = f2_point(&q, &gu, &p0);
        for k in 0..5 {
            assert!((got.0[k] - want.0[k]).abs() < 1e-15);
            assert!((f2.0[k] - want.0[k] - cubic.0[k]).abs() < 1e-15);
        }
        // The commutator of a symmetric and an antisymmetric matrix is symmetric.
        let c = mat3::sub(&om_q, &q_om);
        assert!((c[0][1] - c[1][0]).abs() < 1e-15 && (c[0][2] - c[2][0]).abs() < 1e-15);
    }

    #[test]
    fn f3_vanishes_at_stationary_uniaxial() {
        let p = PhysParams::new(1.0, 6.0, 1.0, 1.0, 0.8, 1.0, 1.0).unwrap();
        let s = (6.0 - 12f64.sqrt()) / 4.0;
        let q = QTensor::uniaxial(s, [1.0, 2.0, 2.0]);
        assert!(molecular_field(&q, &QTensor::ZERO, &p).norm() < 1e-14);
        let f3 = f3_point(&[0.0; 3], &q, &[[0.0; 3]; 5], &QTensor::ZERO, &p);
        assert!(mat3::frobenius_norm(&f3) < 1e-14);
        let u = [0.3, -1.0, 2.0];
        let f3 = f3_point(&u, &QTensor::ZERO, &[[0.0; 3]; 5], &QTensor::ZERO, &p);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(f3[a][b], u[a] * u[b]);
            }
        }
    }

    #[test]
    fn pointwise_kernel_matches_reference_algebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let p = PhysParams::new(1.3, 6.0, 0.8, 1.5, 0.7, 1.1, 0.9).unwrap();
        for _ in 0..200 {
            let v: [f64; NFIELDS] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let q = QTensor(std::array::from_fn(|c| v[OFF_Q + c]));
            let u: [f64; 3] = std::array::from_fn(|i| v[OFF_U + i]);
            let gu: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| v[OFF_GU + 3 * i + j]));
            let gq: [[f64; 3]; 5] = std::array::from_fn(|c| std::array::from_fn(|j| v[OFF_GQ + 3 * c + j]));
            let lq = QTensor(std::array::from_fn(|c| v[OFF_LQ + c]));
            let f2 = f2_point(&q, &gu, &p);
            let div_u = gu[0][0] + gu[1][1] + gu[2][2];
            let f3 = f3_point(&u, &q, &gq, &lq, &p);
            let (rq, f3k) = pointwise(&v, &p);
            for c in 0..5 {
                let adv: f64 = (0..3).map(|j| u[j] * gq[c][j]).sum::<f64>() + div_u * q.0[c];
                assert!((rq[c] - (f2.0[c] - adv)).abs() < 1e-12, "rq[{c}]");
            }
            for a in 0..3 {
                for b in 0..3 {
                    assert!((f3k[3 * a + b] - f3[a][b]).abs() < 1e-12, "f3[{a}][{b}]");
                }
            }
        }
    }
}
