//! Algebra of traceless symmetric 3×3 tensors.
//!
//! A Q-tensor is stored as five coefficients in a fixed orthonormal basis of
//! S₀³ (Frobenius inner product):
//!
//! ```text
//! E1 = (e1⊗e1 − e2⊗e2)/√2
//! E2 = (2 e3⊗e3 − e1⊗e1 − e2⊗e2)/√6
//! E3 = (e1⊗e2 + e2⊗e1)/√2
//! E4 = (e1⊗e3 + e3⊗e1)/√2
//! E5 = (e2⊗e3 + e3⊗e2)/√2
//! ```
//!
//! Because the basis is orthonormal, `|q|₂ = |Q|_F = √Tr(Q²)`, and
//! `Σ_c ∂q_c ∂'q_c = ∂Q : ∂'Q` for any pair of derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
// 1/√6
const INV_SQRT6: f64 = 0.408_248_290_463_863_016_366_214_012_450_981_66;

/// Small dense 3×3 helpers used by the pointwise nonlinear assembly.
pub mod mat3 {
    use super::Mat3;

    pub const ZERO: Mat3 = [[0.0; 3]; 3];
    pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[inline]
    pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
        let mut c = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        c
    }

    #[inline]
    pub fn transpose(a: &Mat3) -> Mat3 {
        let mut t = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = a[j][i];
            }
        }
        t
    }

    #[inline]
    pub fn trace(a: &Mat3) -> f64 {
        a[0][0] + a[1][1] + a[2][2]
    }

    /// Frobenius contraction `A : B = Σ A_ij B_ij`.
    #[inline]
    pub fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += a[i][j] * b[i][j];
            }
        }
        s
    }

    #[inline]
    pub fn add(a: &Mat3, b: &Mat3) -> Mat3 {
        let mut c = *a;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += b[i][j];
            }
        }
        c
    }

    #[inline]
    pub fn sub(a: &Mat3, b: &Mat3) -> Mat3 {
        let mut c = *a;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] -= b[i][j];
            }
        }
        c
    }

    #[inline]
    pub fn scale(a: &Mat3, s: f64) -> Mat3 {
        let mut c = *a;
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        c
    }

    /// `AB − BA`
    #[inline]
    pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
        sub(&mul(a, b), &mul(b, a))
    }

    pub fn det(a: &Mat3) -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    pub fn frobenius_norm(a: &Mat3) -> f64 {
        frobenius(a, a).sqrt()
    }

    /// `R A Rᵀ`
    pub fn conjugate(r: &Mat3, a: &Mat3) -> Mat3 {
        mul(&mul(r, a), &transpose(r))
    }
}

/// Coefficients of the simplified corotational system (elastic constant K = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// `(c − c⋆)/2`
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub c_star: f64,
    /// Active stress strength `α₂ c²`.
    pub kappa: f64,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl PhysParams {
    /// Reduced parameterization; `c_star` is derived as `c − 2a`.
    pub fn new(a: f64, b: f64, c: f64, kappa: f64, lambda: f64, mu: f64, gamma: f64) -> Result<Self> {
        let p = Self { a, b, c, c_star: c - 2.0 * a, kappa, lambda, mu, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Physical parameterization through the concentration, critical concentration and
    /// active coefficient: `a = (c − c⋆)/2`, `κ = α₂c²`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_concentration(
        c: f64,
        c_star: f64,
        alpha2: f64,
        b: f64,
        lambda: f64,
        mu: f64,
        gamma: f64,
    ) -> Result<Self> {
        let p = Self { a: (c - c_star) / 2.0, b, c, c_star, kappa: alpha2 * c * c, lambda, mu, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.c_star, self.kappa, self.lambda, self.mu, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all coefficients must be finite".into()));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParams(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }

    /// Simulations need the supercritical regime `a > 0`.
    pub fn require_supercritical(&self) -> Result<()> {
        if self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("simulation requires a > 0 (c > c_star), got a = {}", self.a)))
        }
    }

    /// Weight of `‖Q‖²` in the energy functional: `max{1, 4κ²/(aμΓ)}`.
    pub fn energy_weight(&self) -> Result<f64> {
        self.require_supercritical()?;
        Ok(f64::max(1.0, 4.0 * self.kappa * self.kappa / (self.a * self.mu * self.gamma)))
    }

    /// `|ξ|²` where the two linear relaxation rates coincide, if any.
    pub fn resonance_k2(&self) -> Option<f64> {
        if self.mu > self.gamma {
            let k2 = self.a * self.gamma / (self.mu - self.gamma);
            (k2 >= 0.0).then_some(k2)
        } else {
            None
        }
    }
}

/// A point of S₀³ in the orthonormal five-component basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QTensor(pub [f64; 5]);

impl QTensor {
    pub const ZERO: QTensor = QTensor([0.0; 5]);

    pub fn basis(i: usize) -> Self {
        let mut q = [0.0; 5];
        q[i] = 1.0;
        QTensor(q)
    }

    /// Symmetric traceless matrix of the coefficients. The (3,3) entry is the
    /// negated sum of the other two diagonal entries so `trace` is exactly zero.
    #[inline]
    pub fn expand(&self) -> Mat3 {
        let [q1, q2, q3, q4, q5] = self.0;
        let m11 = q1 * INV_SQRT2 - q2 * INV_SQRT6;
        let m22 = -q1 * INV_SQRT2 - q2 * INV_SQRT6;
        let m33 = -(m11 + m22);
        let m12 = q3 * INV_SQRT2;
        let m13 = q4 * INV_SQRT2;
        let m23 = q5 * INV_SQRT2;
        [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
    }

    /// Inverse of [`QTensor::expand`]; refuses matrices outside S₀³.
    pub fn reduce(m: &Mat3) -> Result<Self> {
        let norm = mat3::frobenius_norm(m);
        let scale = norm.max(f64::MIN_POSITIVE);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::Representation(format!(
                    "matrix not symmetric: |M{}{} − M{}{}| = {:e}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1,
                    (m[i][j] - m[j][i]).abs()
                )));
            }
        }
        let tr = mat3::trace(m);
        if tr.abs() > 1e-12 * norm {
            return Err(Error::Representation(format!("matrix not traceless: Tr M = {tr:e}")));
        }
        Ok(Self::project(m))
    }

    /// Coefficients of the symmetric traceless part of an arbitrary matrix,
    /// i.e. `reduce(trace_free_project(M))` without the precondition check.
    #[inline]
    pub fn project(m: &Mat3) -> Self {
        QTensor([
            (m[0][0] - m[1][1]) * INV_SQRT2,
            (2.0 * m[2][2] - m[0][0] - m[1][1]) * INV_SQRT6,
            (m[0][1] + m[1][0]) * INV_SQRT2,
            (m[0][2] + m[2][0]) * INV_SQRT2,
            (m[1][2] + m[2][1]) * INV_SQRT2,
        ])
    }

    /// `Tr(Q²) = |q|²`
    #[inline]
    pub fn tr_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// `|Q| = √Tr(Q²)`
    #[inline]
    pub fn norm(&self) -> f64 {
        self.tr_sq().sqrt()
    }

    pub fn tr_cube(&self) -> f64 {
        let m = self.expand();
        mat3::trace(&mat3::mul(&mat3::mul(&m, &m), &m))
    }

    pub fn scale(&self, s: f64) -> Self {
        QTensor(self.0.map(|v| v * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.0;
        for (o, v) in out.iter_mut().zip(other.0) {
            *o += v;
        }
        QTensor(out)
    }

    /// Uniaxial tensor `s (n⊗n − I/3)`; `n` need not be normalized.
    pub fn uniaxial(s: f64, n: [f64; 3]) -> Self {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let n = n.map(|v| v / len);
        let mut m = mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = s * (n[i] * n[j] - if i == j { 1.0 / 3.0 } else { 0.0 });
            }
        }
        Self::project(&m)
    }
}

/// Symmetric traceless part `(M + Mᵀ)/2 − Tr(M)/3 I`.
pub fn trace_free_project(m: &Mat3) -> Mat3 {
    QTensor::project(m).expand()
}

/// `Q² − Tr(Q²)/3 I` as a Q-tensor.
#[inline]
pub fn traceless_square(q: &QTensor) -> QTensor {
    let m = q.expand();
    QTensor::project(&mat3::mul(&m, &m))
}

/// Bulk part of the molecular field, `−aQ + b[Q² − Tr(Q²)/3 I] − cQ Tr(Q²)`.
#[inline]
pub fn bulk_field(q: &QTensor, p: &PhysParams) -> QTensor {
    let sq = traceless_square(q);
    let coef = -p.a - p.c * q.tr_sq();
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = coef * q.0[i] + p.b * sq.0[i];
    }
    QTensor(out)
}

/// `H[Q] = ΔQ − aQ + b[Q² − Tr(Q²)/3 I] − cQ Tr(Q²)` evaluated pointwise.
pub fn molecular_field(q: &QTensor, lap_q: &QTensor, p: &PhysParams) -> QTensor {
    bulk_field(q, p).add(lap_q)
}

/// Bulk Landau–de Gennes density `(c−c⋆)/4 TrQ² − b/3 TrQ³ + c/4 (TrQ²)²`;
/// the elastic `½|∇Q|²` part is accounted for spectrally by the caller.
pub fn free_energy_density(q: &QTensor, p: &PhysParams) -> f64 {
    let t2 = q.tr_sq();
    let t3 = q.tr_cube();
    (p.c - p.c_star) / 4.0 * t2 - p.b / 3.0 * t3 + p.c / 4.0 * t2 * t2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Isotropic,
    Uniaxial,
    Biaxial,
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order, closed-form
/// (trigonometric solution of the characteristic cubic).
pub fn symmetric_eigenvalues(m: &Mat3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = mat3::trace(m) / 3.0;
    let d0 = m[0][0] - q;
    let d1 = m[1][1] - q;
    let d2 = m[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    if p2 == 0.0 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - if i == j { q } else { 0.0 }) / p;
        }
    }
    let r = (mat3::det(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    let mut e = [lo, mid, hi];
    e.sort_by(f64::total_cmp);
    e
}

/// `1e−8 · max(|Q|_F, 1)`
pub fn default_phase_tol(q: &QTensor) -> f64 {
    1e-8 * q.norm().max(1.0)
}

/// Isotropic if every eigenvalue is below `tol` in magnitude, uniaxial if
/// exactly one adjacent pair of sorted eigenvalues agrees within `tol`,
/// biaxial otherwise.
pub fn classify_phase(q: &QTensor, tol: f64) -> Phase {
    let e = symmetric_eigenvalues(&q.expand());
    if e.iter().all(|v| v.abs() < tol) {
        return Phase::Isotropic;
    }
    let low_pair = (e[1] - e[0]).abs() < tol;
    let high_pair = (e[2] - e[1]).abs() < tol;
    match (low_pair, high_pair) {
        (true, false) | (false, true) => Phase::Uniaxial,
        // all three equal but not all zero cannot happen for a traceless tensor
        (true, true) => Phase::Isotropic,
        (false, false) => Phase::Biaxial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, c: f64) -> PhysParams {
        PhysParams::new(a, b, c, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn expand_of_zero_and_basis() {
        assert_eq!(QTensor::ZERO.expand(), mat3::ZERO);
        for i in 0..5 {
            let m = QTensor::basis(i).expand();
            assert!((mat3::frobenius_norm(&m) - 1.0).abs() < 1e-15);
            assert_eq!(mat3::trace(&m), 0.0);
        }
        // first basis tensor is diag(1, −1, 0)/√2
        let e1 = QTensor::basis(0).expand();
        assert!((e1[0][0] - INV_SQRT2).abs() < 1e-16);
        assert!((e1[1][1] + INV_SQRT2).abs() < 1e-16);
        assert_eq!(e1[2][2], 0.0);
    }

    #[test]
    fn basis_is_orthonormal() {
        for i in 0..5 {
            for j in 0..5 {
                let d = mat3::frobenius(&QTensor::basis(i).expand(), &QTensor::basis(j).expand());
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-15, "({i},{j}) -> {d}");
            }
        }
    }

    #[test]
    fn reduce_known_matrices() {
        assert_eq!(QTensor::reduce(&mat3::ZERO).unwrap(), QTensor::ZERO);
        let m = [[-1.0 / 3.0, 0.0, 0.0], [0.0, -1.0 / 3.0, 0.0], [0.0, 0.0, 2.0 / 3.0]];
        let q = QTensor::reduce(&m).unwrap();
        assert!((q.norm() - 6f64.sqrt() / 3.0).abs() < 1e-15);
        let bad = [[0.1, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(matches!(QTensor::reduce(&bad), Err(Error::Representation(_))));
        let asym = [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(QTensor::reduce(&asym).is_err());
    }

    #[test]
    fn trace_free_projection_examples() {
        let z = trace_free_project(&mat3::IDENTITY);
        assert!(z.iter().flatten().all(|v| v.abs() < 1e-16));
        let m = trace_free_project(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let want = [[2.0 / 3.0, 0.0, 0.0], [0.0, -1.0 / 3.0, 0.0], [0.0, 0.0, -1.0 / 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn molecular_field_vanishes_at_nematic_root() {
        let p = params(1.0, 6.0, 1.0);
        // root of 2cs² − bs + 3a = 0
        let s = (6.0 - 12f64.sqrt()) / 4.0;
        assert!((2.0 * s * s - 6.0 * s + 3.0).abs() < 1e-14);
        let q = QTensor::uniaxial(s, [0.0, 0.0, 1.0]);
        let h = molecular_field(&q, &QTensor::ZERO, &p);
        assert!(h.norm() < 1e-14, "{h:?}");

        let q1 = QTensor::uniaxial(1.0, [0.0, 0.0, 1.0]);
        let h1 = molecular_field(&q1, &QTensor::ZERO, &p);
        let want = q1.scale(1.0 / 3.0);
        for i in 0..5 {
            assert!((h1.0[i] - want.0[i]).abs() < 1e-14);
        }
        assert_eq!(molecular_field(&QTensor::ZERO, &QTensor::ZERO, &p), QTensor::ZERO);
    }

    #[test]
    fn free_energy_examples() {
        let p = params(1.0, 6.0, 1.0);
        let q = QTensor::uniaxial(1.0, [0.0, 0.0, 1.0]);
        assert!((q.tr_sq() - 2.0 / 3.0).abs() < 1e-15);
        assert!((q.tr_cube() - 2.0 / 9.0).abs() < 1e-15);
        assert!(free_energy_density(&q, &p).abs() < 1e-15);
        let p0 = params(1.0, 0.0, 1.0);
        assert!((free_energy_density(&q, &p0) - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(free_energy_density(&QTensor::ZERO, &p), 0.0);
    }

    #[test]
    fn phase_examples() {
        assert_eq!(classify_phase(&QTensor::ZERO, 1e-8), Phase::Isotropic);
        let uni = QTensor::reduce(&[[-1.0 / 3.0, 0.0, 0.0], [0.0, -1.0 / 3.0, 0.0], [0.0, 0.0, 2.0 / 3.0]]).unwrap();
        assert_eq!(classify_phase(&uni, 1e-8), Phase::Uniaxial);
        let bi = QTensor::reduce(&[[0.01, 0.0, 0.0], [0.0, 0.02, 0.0], [0.0, 0.0, -0.03]]).unwrap();
        assert_eq!(classify_phase(&bi, 1e-8), Phase::Biaxial);
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let e = symmetric_eigenvalues(&[[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14 && (e[2] - 3.0).abs() < 1e-14);
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14 && (e[2] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(PhysParams::new(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let p = PhysParams::new(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(p.energy_weight().is_err());
    }

    #[test]
    fn concentration_form_is_exact() {
        let p = PhysParams::from_concentration(3.0, 2.0, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.a, 0.5);
        assert_eq!(p.kappa, 4.5);
    }

    #[test]
    fn energy_weight_examples() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.energy_weight().unwrap(), 4.0);
        let p = PhysParams::new(1.0, 1.0, 1.0, 0.1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.energy_weight().unwrap(), 1.0);
    }
}
