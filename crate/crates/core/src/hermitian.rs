//! Complex Hermitian linear algebra.
//!
//! Carriers for channels, beamformers and covariances, a cyclic Jacobi
//! eigensolver, PSD checks, rank-one factorization and the real symmetric
//! embedding `A + jB -> [[A, -B], [B, A]]` used by the conic solver.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use nalgebra::Complex;

/// Complex double.
pub type C64 = Complex<f64>;

/// Relative tolerance on `‖H − H^H‖_max` accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// A matrix is accepted as PSD when `psd_residual ≤ PSD_TOL · max(1, Tr H)`.
pub const PSD_TOL: f64 = 1e-8;
/// Numerical rank-one threshold on `σ₂/σ₁`.
pub const RANK_ONE_TOL: f64 = 1e-6;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e}, scale {scale:.3e})")]
    NotHermitian { asymmetry: f64, scale: f64 },
    #[error("non-finite entry")]
    NonFinite,
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is not numerically rank-one (sigma2/sigma1 = {ratio:.3e})")]
    NotRankOne { ratio: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(DVector<C64>);

impl ComplexVector {
    pub fn new(entries: DVector<C64>) -> Result<Self, LinalgError> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[C64]) -> Result<Self, LinalgError> {
        Self::new(DVector::from_column_slice(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `x^H y`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `v v^H`.
    pub fn outer(&self) -> HermitianMatrix {
        let m = &self.0 * self.0.adjoint();
        HermitianMatrix::from_raw(m)
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// Dense complex Hermitian matrix. The diagonal is stored exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates conjugate symmetry to `HERMITIAN_TOL` relative and then
    /// symmetrizes exactly.
    pub fn new(m: DMatrix<C64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = m.nrows();
        let mut asym: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL * scale {
            return Err(LinalgError::NotHermitian { asymmetry: asym, scale });
        }
        Ok(Self::from_raw(m))
    }

    /// Projects onto the Hermitian matrices, `(M + M^H)/2`, without checking.
    pub fn from_raw(m: DMatrix<C64>) -> Self {
        let mut h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        for i in 0..h.nrows() {
            h[(i, i)].im = 0.0;
        }
        Self(h)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `v^H H v`, real for Hermitian `H`.
    pub fn quad_form(&self, v: &ComplexVector) -> f64 {
        let hv = &self.0 * v.as_vector();
        v.as_vector().dotc(&hv).re
    }

    /// `Re tr(self · other)`; the trace inner product of two Hermitian matrices.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sum of a nonempty or empty list; `dim` is used for the empty case.
    pub fn sum<'a, I>(dim: usize, items: I) -> Self
    where
        I: IntoIterator<Item = &'a HermitianMatrix>,
    {
        let mut acc = DMatrix::zeros(dim, dim);
        for h in items {
            acc += &h.0;
        }
        Self(acc)
    }
}

impl std::ops::Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, i: usize) -> ComplexVector {
        ComplexVector(self.eigenvectors.column(i).into_owned())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `Q Λ Q^H`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let lam = self.eigenvalues[j];
            for i in 0..n {
                scaled[(i, j)] *= lam;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the classical real rotation, so the pivot is annihilated
/// exactly. Sweeps stop once the off-diagonal Frobenius norm falls below
/// `1e-12 · ‖H‖_F`.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = h.dim();
    let mut a = h.0.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.norm();
    let mut converged = scale == 0.0 || n <= 1;
    if !converged {
        let tol = JACOBI_TOL * scale;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= tol {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q, scale);
                }
            }
        }
        if !converged && off_diagonal_norm(&a) <= tol {
            converged = true;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &v.column(src));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

fn rotate(a: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= f64::EPSILON * f64::EPSILON * scale {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// `max(0, −λ_min(H))`.
pub fn psd_residual(h: &HermitianMatrix) -> Result<f64, LinalgError> {
    let eig = eig_hermitian(h)?;
    Ok((-eig.min_eigenvalue()).max(0.0))
}

/// Whether `psd_residual(H) ≤ PSD_TOL · max(1, Tr H)`.
pub fn is_psd(h: &HermitianMatrix) -> Result<bool, LinalgError> {
    Ok(psd_residual(h)? <= PSD_TOL * h.trace().max(1.0))
}

/// Factor a numerically rank-one PSD matrix as `v v^H`.
///
/// The returned vector has its first nonzero entry real and nonnegative.
pub fn rank_one_factor(h: &HermitianMatrix) -> Result<ComplexVector, LinalgError> {
    let n = h.dim();
    if n == 0 {
        return Ok(ComplexVector::zeros(0));
    }
    let eig = eig_hermitian(h)?;
    let top = eig.eigenvalues[0];
    if top <= 0.0 {
        if h.max_abs() == 0.0 {
            return Ok(ComplexVector::zeros(n));
        }
        return Err(LinalgError::NotRankOne { ratio: f64::INFINITY });
    }
    let second = eig.eigenvalues.get(1).map_or(0.0, |x| x.abs());
    let tail = eig.eigenvalues.iter().skip(1).map(|x| x.abs()).fold(0.0, f64::max);
    let ratio = second.max(tail) / top;
    if ratio > RANK_ONE_TOL {
        return Err(LinalgError::NotRankOne { ratio });
    }
    let mut v = eig.eigenvector(0).into_inner() * C64::new(top.sqrt(), 0.0);
    normalize_phase(&mut v);
    let residual = (&v * v.adjoint() - h.as_matrix()).norm();
    if residual > RANK_ONE_TOL * h.trace().abs().max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotRankOne { ratio });
    }
    Ok(ComplexVector(v))
}

/// Rotates `v` so its first entry of non-negligible magnitude is real and nonnegative.
pub fn normalize_phase(v: &mut DVector<C64>) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12 * peak).copied() {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Real symmetric embedding `A + jB -> [[A, -B], [B, A]]`.
pub fn embed_real(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let z = h.0[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i + n, j)] = z.im;
            out[(i, j + n)] = -z.im;
        }
    }
    out
}

/// Inverse of [`embed_real`]. For a general symmetric input this is the
/// orthogonal projection onto embedded Hermitian matrices, which preserves PSD.
pub fn extract_hermitian(m: &DMatrix<f64>) -> Result<HermitianMatrix, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !m.nrows().is_multiple_of(2) {
        return Err(LinalgError::DimensionMismatch { expected: m.nrows() + 1, got: m.nrows() });
    }
    let n = m.nrows() / 2;
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let re = 0.5 * (m[(i, j)] + m[(i + n, j + n)]);
            let im = 0.5 * (m[(i + n, j)] - m[(i, j + n)]);
            h[(i, j)] = C64::new(re, im);
        }
    }
    Ok(HermitianMatrix::from_raw(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        HermitianMatrix::from_raw(m)
    }

    #[test]
    fn identity_spectrum() {
        let eig = eig_hermitian(&HermitianMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rank_one_spectrum() {
        let v = ComplexVector::from_slice(&[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)]).unwrap();
        let eig = eig_hermitian(&v.outer()).unwrap();
        assert_relative_eq!(eig.eigenvalues[0], 5.0, epsilon = 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12 && eig.eigenvalues[2].abs() < 1e-12);
    }

    #[test]
    fn diagonal_sorted_descending() {
        let eig = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 16, 33] {
            let h = random_hermitian(&mut rng, n);
            let eig = eig_hermitian(&h).unwrap();
            let err = (eig.reconstruct() - h.as_matrix()).norm();
            assert!(err <= 1e-10 * h.frobenius_norm(), "n={n} err={err}");
            let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
            let orth = (gram - DMatrix::<C64>::identity(n, n)).norm();
            assert!(orth <= 1e-10, "n={n} orth={orth}");
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn deterministic_repeated_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 8);
        let a = eig_hermitian(&h).unwrap();
        let b = eig_hermitian(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn psd_residual_cases() {
        assert_eq!(psd_residual(&HermitianMatrix::identity(3)).unwrap(), 0.0);
        assert_relative_eq!(
            psd_residual(&HermitianMatrix::from_real_diagonal(&[1.0, -2.0])).unwrap(),
            2.0
        );
        assert_eq!(psd_residual(&HermitianMatrix::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_factor_cases() {
        let v = rank_one_factor(&HermitianMatrix::from_real_diagonal(&[4.0, 0.0])).unwrap();
        assert_relative_eq!(v[0].re, 2.0, epsilon = 1e-12);
        assert!(v[0].im.abs() < 1e-15 && v[1].norm() < 1e-15);

        let s = 1.0 / 2f64.sqrt();
        let u = ComplexVector::from_slice(&[c(s, 0.0), c(0.0, s)]).unwrap();
        let h = u.outer().scaled(9.0);
        let v = rank_one_factor(&h).unwrap();
        assert_relative_eq!(v[0].re, 3.0 * s, epsilon = 1e-12);
        assert!(v[0].im.abs() < 1e-12);
        assert!((v[1] - c(0.0, 3.0 * s)).norm() < 1e-12);

        assert!(matches!(
            rank_one_factor(&HermitianMatrix::identity(2)),
            Err(LinalgError::NotRankOne { .. })
        ));
    }

    #[test]
    fn rank_one_factor_inverts_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut raw = DVector::from_fn(6, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            normalize_phase(&mut raw);
            let v = ComplexVector::new(raw).unwrap();
            let back = rank_one_factor(&v.outer()).unwrap();
            assert!((back.as_vector() - v.as_vector()).norm() < 1e-10 * v.norm_squared().sqrt());
        }
    }

    #[test]
    fn embedding_basics() {
        assert_eq!(embed_real(&HermitianMatrix::identity(3)), DMatrix::<f64>::identity(6, 6));
        let pauli = HermitianMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let e = embed_real(&pauli);
        let mut spec: Vec<f64> = SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        spec.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in spec.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn embedding_duplicates_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 7] {
            let h = random_hermitian(&mut rng, n);
            let e = embed_real(&h);
            assert_relative_eq!(e.trace(), 2.0 * h.trace(), epsilon = 1e-12);
            let mut real_spec: Vec<f64> = SymmetricEigen::new(e.clone()).eigenvalues.iter().copied().collect();
            real_spec.sort_by(|a, b| b.total_cmp(a));
            let herm = eig_hermitian(&h).unwrap().eigenvalues;
            for (i, lam) in herm.iter().enumerate() {
                assert_relative_eq!(real_spec[2 * i], *lam, epsilon = 1e-10);
                assert_relative_eq!(real_spec[2 * i + 1], *lam, epsilon = 1e-10);
            }
            assert_eq!(extract_hermitian(&e).unwrap(), h);
        }
    }
}
