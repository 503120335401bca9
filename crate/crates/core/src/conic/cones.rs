//! Cone definitions, membership margins and the logarithmically homogeneous
//! barriers used by the interior-point iteration.
//!
//! Conventions:
//! - `Soc`: `x₀ ≥ ‖x₁:‖`.
//! - `RotatedSoc`: `2·x₀·x₁ ≥ ‖x₂:‖²`, `x₀, x₁ ≥ 0`.
//! - `Exp`: closure of `{(x, y, z) : y > 0, y·e^{x/y} ≤ z}`.
//! - `Psd { side }`: symmetric matrices stored as `svec`, the lower triangle
//!   in column-major order with off-diagonal entries scaled by `√2`, so that
//!   `svec(X)·svec(S) = tr(XS)`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::ConicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cone {
    Nonneg { dim: usize },
    Soc { dim: usize },
    RotatedSoc { dim: usize },
    Exp,
    Psd { side: usize },
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Nonneg { dim } | Cone::Soc { dim } | Cone::RotatedSoc { dim } => dim,
            Cone::Exp => 3,
            Cone::Psd { side } => side * (side + 1) / 2,
        }
    }

    /// Barrier parameter ν of the standard barrier.
    pub fn barrier_parameter(&self) -> f64 {
        match *self {
            Cone::Nonneg { dim } => dim as f64,
            Cone::Soc { .. } | Cone::RotatedSoc { .. } => 2.0,
            Cone::Exp => 3.0,
            Cone::Psd { side } => side as f64,
        }
    }

    /// Minimum admissible dimension for the cone type.
    pub(crate) fn is_well_formed(&self) -> bool {
        match *self {
            Cone::Nonneg { dim } => dim >= 1,
            Cone::Soc { dim } => dim >= 2,
            Cone::RotatedSoc { dim } => dim >= 3,
            Cone::Exp => true,
            Cone::Psd { side } => side >= 1,
        }
    }

    /// The point `x` with `x = −∇F(x)`; there `x·x = ν`.
    pub(crate) fn write_central_point(&self, out: &mut [f64]) {
        out.fill(0.0);
        match *self {
            Cone::Nonneg { .. } => out.fill(1.0),
            Cone::Soc { .. } => out[0] = std::f64::consts::SQRT_2,
            Cone::RotatedSoc { .. } => {
                out[0] = 1.0;
                out[1] = 1.0;
            }
            Cone::Exp => out.copy_from_slice(&EXP_CENTRAL_POINT),
            Cone::Psd { side } => {
                let mut idx = 0;
                for j in 0..side {
                    out[idx] = 1.0;
                    idx += side - j;
                }
            }
        }
    }
}

/// A cone together with its position in the variable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    #[serde(flatten)]
    pub cone: Cone,
    pub offset: usize,
}

impl ConeBlock {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.cone.dim()
    }
}

/// Solution of `x = −∇F(x)` for the exponential-cone barrier.
pub(crate) const EXP_CENTRAL_POINT: [f64; 3] =
    [-0.827_838_399_065_678_6, 0.805_102_001_584_795_4, 1.290_927_709_856_958];

pub fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        out.push(m[(j, j)]);
        for i in j + 1..n {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    out
}

pub fn smat(v: &[f64], side: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(side, side);
    let mut idx = 0;
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..side {
        m[(j, j)] = v[idx];
        idx += 1;
        for i in j + 1..side {
            let val = v[idx] * inv;
            m[(i, j)] = val;
            m[(j, i)] = val;
            idx += 1;
        }
    }
    m
}

fn write_svec(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut idx = 0;
    for j in 0..n {
        out[idx] = m[(j, j)];
        idx += 1;
        for i in j + 1..n {
            out[idx] = std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            idx += 1;
        }
    }
}

/// Signed membership margin, nonnegative exactly on the cone.
///
/// Orthant: `min x`; SOC: `x₀ − ‖x₁:‖`; rotated SOC: `min(x₀, x₁)` when that
/// is negative, else `2x₀x₁ − ‖x₂:‖²`; EXP: `z − y·e^{x/y}` for `y > 0` and
/// `min(−x, z)` on the `y = 0` face; PSD: `λ_min`.
pub fn check_membership(point: &[f64], cone: &Cone) -> Result<f64, ConicError> {
    if point.len() != cone.dim() {
        return Err(ConicError::DimensionMismatch { expected: cone.dim(), got: point.len() });
    }
    let margin = match *cone {
        Cone::Nonneg { .. } => point.iter().copied().fold(f64::INFINITY, f64::min),
        Cone::Soc { .. } => point[0] - norm(&point[1..]),
        Cone::RotatedSoc { .. } => {
            let lo = point[0].min(point[1]);
            if lo < 0.0 {
                lo
            } else {
                2.0 * point[0] * point[1] - norm_sq(&point[2..])
            }
        }
        Cone::Exp => {
            let (x, y, z) = (point[0], point[1], point[2]);
            if y > 0.0 {
                z - y * (x / y).exp()
            } else if y == 0.0 {
                (-x).min(z)
            } else {
                y
            }
        }
        Cone::Psd { side } => {
            if side == 0 {
                0.0
            } else {
                let m = smat(point, side);
                SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    };
    Ok(margin)
}

/// Signed margin for the dual cone; the symmetric cones are self-dual.
/// For EXP the dual is `{(u, v, w) : u < 0, −u·e^{v/u} ≤ e·w}` plus the
/// `u = 0, v ≥ 0, w ≥ 0` face, and the margin is `e·w + u·e^{v/u}`.
pub fn check_dual_membership(point: &[f64], cone: &Cone) -> Result<f64, ConicError> {
    match *cone {
        Cone::Exp => {
            if point.len() != 3 {
                return Err(ConicError::DimensionMismatch { expected: 3, got: point.len() });
            }
            let (u, v, w) = (point[0], point[1], point[2]);
            Ok(if u < 0.0 {
                std::f64::consts::E * w + u * (v / u).exp()
            } else if u == 0.0 {
                v.min(w)
            } else {
                -u
            })
        }
        _ => check_membership(point, cone),
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Barrier data at an interior point: the gradient and the inverse Hessian.
pub(crate) enum LocalBarrier {
    Nonneg { x: Vec<f64> },
    /// SOC and rotated SOC share `F = −ln(xᵀQx)` with an involutory `Q`;
    /// `H⁻¹ = x xᵀ − (d/2) Q` with `d = xᵀQx`.
    Quadratic { x: Vec<f64>, d: f64, rotated: bool },
    /// `H = G Ĥ Gᵀ` with `G` the unit lower-triangular involution built from
    /// `∇ψ` and `Ĥ = diag(1/ψ², Ĥ₂)`; both `H` and `H⁻¹ = Gᵀ Ĥ⁻¹ G` are applied
    /// in this factored form, which stays accurate as `ψ → 0`.
    Exp { psi: f64, y: f64, z: f64, dpsi: Vector3<f64>, grad: Vector3<f64> },
    /// `chol` is the lower Cholesky factor of `x`.
    Psd { side: usize, x: DMatrix<f64>, xinv: DMatrix<f64>, chol: DMatrix<f64> },
}

fn apply_q(x: &[f64], rotated: bool, out: &mut [f64]) {
    if rotated {
        out[0] = x[1];
        out[1] = x[0];
        for i in 2..x.len() {
            out[i] = -x[i];
        }
    } else {
        out[0] = x[0];
        for i in 1..x.len() {
            out[i] = -x[i];
        }
    }
}

fn quadratic_form(x: &[f64], rotated: bool) -> f64 {
    if rotated {
        2.0 * x[0] * x[1] - norm_sq(&x[2..])
    } else {
        x[0] * x[0] - norm_sq(&x[1..])
    }
}

fn exp_psi(x: &[f64]) -> Option<f64> {
    let (a, y, z) = (x[0], x[1], x[2]);
    if !(y > 0.0 && z > 0.0) {
        return None;
    }
    let psi = y * (z / y).ln() - a;
    (psi > 0.0 && psi.is_finite()).then_some(psi)
}

/// `G v` where `G = [∇ψ, e₂, e₃]`; `G` is its own inverse.
fn exp_apply_g(dpsi: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-v[0], dpsi[1] * v[0] + v[1], dpsi[2] * v[0] + v[2])
}

fn exp_apply_gt(dpsi: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-v[0] + dpsi[1] * v[1] + dpsi[2] * v[2], v[1], v[2])
}

/// `Ĥ₂ = diag(1/y², 1/z²) + ŵŵᵀ/(ψy)` with `ŵ = (1, −y/z)`.
fn exp_core(psi: f64, y: f64, z: f64, v: &Vector3<f64>) -> Vector3<f64> {
    let wv = v[1] - y / z * v[2];
    let k = wv / (psi * y);
    Vector3::new(v[0] / (psi * psi), v[1] / (y * y) + k, v[2] / (z * z) - k * y / z)
}

/// `Ĥ₂⁻¹ = diag(y², z²) − d dᵀ/(ψy + 2y²)` with `d = (y², −yz)`.
fn exp_core_inv(psi: f64, y: f64, z: f64, v: &Vector3<f64>) -> Vector3<f64> {
    let dv = y * y * v[1] - y * z * v[2];
    let k = dv / (psi * y + 2.0 * y * y);
    Vector3::new(psi * psi * v[0], y * y * v[1] - k * y * y, z * z * v[2] + k * y * z)
}

pub(crate) fn exp_dual_interior(s: &[f64]) -> bool {
    let (u, v, w) = (s[0], s[1], s[2]);
    u < 0.0 && w > 0.0 && ((-u).ln() + v / u) < 1.0 + w.ln()
}

impl LocalBarrier {
    /// `None` when `x` is not in the interior of the cone.
    pub(crate) fn at(cone: &Cone, x: &[f64]) -> Option<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        match *cone {
            Cone::Nonneg { .. } => {
                x.iter().all(|&v| v > 0.0).then(|| LocalBarrier::Nonneg { x: x.to_vec() })
            }
            Cone::Soc { .. } | Cone::RotatedSoc { .. } => {
                let rotated = matches!(cone, Cone::RotatedSoc { .. });
                let d = quadratic_form(x, rotated);
                let positive = if rotated { x[0] > 0.0 && x[1] > 0.0 } else { x[0] > 0.0 };
                (positive && d > 0.0).then(|| LocalBarrier::Quadratic { x: x.to_vec(), d, rotated })
            }
            Cone::Exp => {
                let psi = exp_psi(x)?;
                let (y, z) = (x[1], x[2]);
                let dpsi = Vector3::new(-1.0, (z / y).ln() - 1.0, y / z);
                let grad = -dpsi / psi - Vector3::new(0.0, 1.0 / y, 1.0 / z);
                Some(LocalBarrier::Exp { psi, y, z, dpsi, grad })
            }
            Cone::Psd { side } => {
                let m = smat(x, side);
                let factor = Cholesky::new(m.clone())?;
                let xinv = factor.inverse();
                Some(LocalBarrier::Psd { side, x: m, xinv, chol: factor.unpack() })
            }
        }
    }

    pub(crate) fn gradient(&self, out: &mut [f64]) {
        match self {
            LocalBarrier::Nonneg { x } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -1.0 / v;
                }
            }
            LocalBarrier::Quadratic { x, d, rotated } => {
                apply_q(x, *rotated, out);
                for o in out.iter_mut() {
                    *o *= -2.0 / d;
                }
            }
            LocalBarrier::Exp { grad, .. } => out.copy_from_slice(grad.as_slice()),
            LocalBarrier::Psd { xinv, .. } => {
                write_svec(xinv, out);
                for o in out.iter_mut() {
                    *o = -*o;
                }
            }
        }
    }

    /// `out = H(x) v`.
    pub(crate) fn apply_hessian(&self, v: &[f64], out: &mut [f64]) {
        match self {
            LocalBarrier::Nonneg { x } => {
                for ((o, vi), xi) in out.iter_mut().zip(v).zip(x) {
                    *o = vi / (xi * xi);
                }
            }
            LocalBarrier::Quadratic { x, d, rotated } => {
                let mut qx = vec![0.0; x.len()];
                apply_q(x, *rotated, &mut qx);
                let qxv = dot(&qx, v);
                apply_q(v, *rotated, out);
                for (o, qxi) in out.iter_mut().zip(&qx) {
                    *o = 4.0 * qxi * qxv / (d * d) - 2.0 * *o / d;
                }
            }
            LocalBarrier::Exp { psi, y, z, dpsi, .. } => {
                let inner = exp_apply_gt(dpsi, &Vector3::new(v[0], v[1], v[2]));
                let r = exp_apply_g(dpsi, &exp_core(*psi, *y, *z, &inner));
                out.copy_from_slice(r.as_slice());
            }
            LocalBarrier::Psd { side, xinv, .. } => {
                let vm = smat(v, *side);
                let r = xinv * vm * xinv;
                write_svec(&r, out);
            }
        }
    }

    /// `out = Lᵀ v` for the factorization `H(x)⁻¹ = L Lᵀ`.
    pub(crate) fn apply_inv_hessian_factor_t(&self, v: &[f64], out: &mut [f64]) {
        match self {
            LocalBarrier::Nonneg { x } => {
                for ((o, vi), xi) in out.iter_mut().zip(v).zip(x) {
                    *o = vi * xi;
                }
            }
            LocalBarrier::Quadratic { x, d, rotated } => {
                // H⁻¹ = (d/2) Tᵀ W² T, where T maps the rotated cone onto the
                // standard one and W is the symmetric hyperbolic scaling of
                // u = T x with W² = 2ūūᵀ − J, ū = u/√d.
                let to_standard = |w: &[f64], out: &mut [f64]| {
                    out.copy_from_slice(w);
                    if *rotated {
                        out[0] = (w[0] + w[1]) * std::f64::consts::FRAC_1_SQRT_2;
                        out[1] = (w[0] - w[1]) * std::f64::consts::FRAC_1_SQRT_2;
                    }
                };
                let mut u = vec![0.0; x.len()];
                to_standard(x, &mut u);
                let sd = d.sqrt();
                for ui in u.iter_mut() {
                    *ui /= sd;
                }
                let mut tv = vec![0.0; v.len()];
                to_standard(v, &mut tv);
                let tail = dot(&u[1..], &tv[1..]);
                let scale = (0.5 * d).sqrt();
                out[0] = scale * (u[0] * tv[0] + tail);
                let k = tv[0] + tail / (1.0 + u[0]);
                for i in 1..x.len() {
                    out[i] = scale * (tv[i] + u[i] * k);
                }
            }
            LocalBarrier::Exp { psi, y, z, dpsi, .. } => {
                // H⁻¹ = Gᵀ C Cᵀ G with C = diag(ψ, C₂) the Cholesky factor of Ĥ⁻¹.
                let (psi, y, z) = (*psi, *y, *z);
                let gv = exp_apply_g(dpsi, &Vector3::new(v[0], v[1], v[2]));
                let a = y * y * (psi + y) / (psi + 2.0 * y);
                let b = y * y * z / (psi + 2.0 * y);
                let l11 = a.sqrt();
                let l21 = b / l11;
                let l22 = z * (psi / (psi + y)).sqrt();
                out[0] = psi * gv[0];
                out[1] = l11 * gv[1] + l21 * gv[2];
                out[2] = l22 * gv[2];
            }
            LocalBarrier::Psd { side, chol, .. } => {
                let vm = smat(v, *side);
                let r = chol.transpose() * vm * chol;
                write_svec(&r, out);
            }
        }
    }

    /// `out = H(x)⁻¹ v`.
    pub(crate) fn apply_inv_hessian(&self, v: &[f64], out: &mut [f64]) {
        match self {
            LocalBarrier::Nonneg { x } => {
                for ((o, vi), xi) in out.iter_mut().zip(v).zip(x) {
                    *o = vi * xi * xi;
                }
            }
            LocalBarrier::Quadratic { x, d, rotated } => {
                let xv = dot(x, v);
                apply_q(v, *rotated, out);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = xi * xv - 0.5 * d * *o;
                }
            }
            LocalBarrier::Exp { psi, y, z, dpsi, .. } => {
                let inner = exp_apply_g(dpsi, &Vector3::new(v[0], v[1], v[2]));
                let r = exp_apply_gt(dpsi, &exp_core_inv(*psi, *y, *z, &inner));
                out.copy_from_slice(r.as_slice());
            }
            LocalBarrier::Psd { side, x, .. } => {
                let vm = smat(v, *side);
                let r = x * vm * x;
                write_svec(&r, out);
            }
        }
    }
}

/// Local dual norm `‖s/μ + ∇F(x)‖` in the `H(x)⁻¹` metric, or `None` when
/// either `x` or `s` is not interior.
pub(crate) fn proximity(cone: &Cone, x: &[f64], s: &[f64], mu: f64) -> Option<f64> {
    if s.iter().any(|v| !v.is_finite()) {
        return None;
    }
    match *cone {
        Cone::Psd { side } => {
            let xm = smat(x, side);
            let l = Cholesky::new(xm)?.unpack();
            let sm = smat(s, side);
            let mut w = l.transpose() * sm * &l / mu;
            for i in 0..side {
                w[(i, i)] -= 1.0;
            }
            Some(w.norm())
        }
        Cone::Exp => {
            if !exp_dual_interior(s) {
                return None;
            }
            let local = LocalBarrier::at(cone, x)?;
            let mut g = [0.0; 3];
            local.gradient(&mut g);
            let w: Vec<f64> = s.iter().zip(&g).map(|(si, gi)| si / mu + gi).collect();
            let mut hw = [0.0; 3];
            local.apply_inv_hessian(&w, &mut hw);
            Some(dot(&w, &hw).max(0.0).sqrt())
        }
        _ => {
            let local = LocalBarrier::at(cone, x)?;
            LocalBarrier::at(cone, s)?;
            let mut g = vec![0.0; x.len()];
            local.gradient(&mut g);
            let w: Vec<f64> = s.iter().zip(&g).map(|(si, gi)| si / mu + gi).collect();
            let mut hw = vec![0.0; x.len()];
            local.apply_inv_hessian(&w, &mut hw);
            Some(dot(&w, &hw).max(0.0).sqrt())
        }
    }
}
