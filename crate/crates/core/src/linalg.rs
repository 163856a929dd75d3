//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is a square, row-major matrix of `Complex64`. Products and
//! the Hermitian eigensolver are delegated to `faer` (always sequential, so
//! results are bitwise reproducible); everything else lives here.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::diag::Diag;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::BadShape {
                dim,
                len: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: Complex64, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm of `M - M†`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius norm of `M + M†`.
    pub fn anti_hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) + self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius norm of `U†U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut g = adjoint_matmul(self, self);
        for i in 0..self.dim {
            let d = g.get(i, i) - ONE;
            g.set(i, i, d);
        }
        g.frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Multiplies column `j` by `factors[j]`, i.e. `M · diag(factors)`.
    pub fn scale_columns(&self, factors: &[Complex64]) -> Self {
        assert_eq!(factors.len(), self.dim);
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            for (z, &f) in row.iter_mut().zip(factors) {
                *z *= f;
            }
        }
        out
    }

    /// `diag(left) · M · diag(right)`.
    pub fn scale_rows_columns(&self, left: &[Complex64], right: &[Complex64]) -> Self {
        assert_eq!(left.len(), self.dim);
        assert_eq!(right.len(), self.dim);
        let mut out = self.clone();
        for (row, &l) in out.data.chunks_exact_mut(self.dim).zip(left) {
            for (z, &r) in row.iter_mut().zip(right) {
                *z = l * *z * r;
            }
        }
        out
    }

    pub(crate) fn view(&self) -> MatRef<'_, Complex64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    fn view_mut(&mut self) -> MatMut<'_, Complex64> {
        MatMut::from_row_major_slice_mut(&mut self.data, self.dim, self.dim)
    }


    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `M† v`.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![ZERO; self.dim];
        for (row, &vi) in self.data.chunks_exact(self.dim).zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a.conj() * vi;
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul_unchecked(self.view(), rhs.view())
    }
}

fn matmul_unchecked<L, R>(lhs: MatRef<'_, L>, rhs: MatRef<'_, R>) -> ComplexMatrix
where
    L: Conjugate<Canonical = Complex64>,
    R: Conjugate<Canonical = Complex64>,
{
    let mut out = ComplexMatrix::zeros(lhs.nrows());
    matmul(out.view_mut(), Accum::Replace, lhs, rhs, ONE, Par::Seq);
    out
}

/// Standard matrix product `X·Y`.
pub fn try_matmul(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, y)?;
    Ok(x * y)
}

/// `X†·Y` without materializing the adjoint.
pub fn adjoint_matmul(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(x.dim, y.dim, "adjoint_matmul dimension mismatch");
    matmul_unchecked(x.view().adjoint(), y.view())
}

/// `X·Y†` without materializing the adjoint.
pub fn matmul_adjoint(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(x.dim, y.dim, "matmul_adjoint dimension mismatch");
    matmul_unchecked(x.view(), y.view().adjoint())
}

/// `[X, Y] = XY − YX`.
pub fn try_commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, y)?;
    Ok(commutator(x, y))
}

/// `[X, Y] = XY − YX`; panics on mismatched dimensions.
pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(x.dim, y.dim, "commutator dimension mismatch");
    let mut out = x * y;
    matmul(
        out.view_mut(),
        Accum::Add,
        y.view(),
        x.view(),
        Complex64::new(-1.0, 0.0),
        Par::Seq,
    );
    out
}

fn check_dims(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch {
            left: x.dim,
            right: y.dim,
        });
    }
    Ok(())
}

/// Eigendecomposition `M = Q·diag(λ)·Q†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `Q·diag(f(λ))·Q†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let phases: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        matmul_adjoint(&self.eigenvectors.scale_columns(&phases), &self.eigenvectors)
    }

    /// `‖M·Q − Q·diag(λ)‖_F`.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let lam: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        let mut r = m * &self.eigenvectors;
        r -= &self.eigenvectors.scale_columns(&lam);
        r.frobenius_norm()
    }
}

/// Hermitian eigendecomposition. The input is symmetrized to `(M + M†)/2`
/// first; eigenvalues come back ascending.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    let n = m.dim;
    let sym = ComplexMatrix::from_fn(n, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
    let mut vectors = Mat::<Complex64>::zeros(n, n);
    let mut values = Diag::<Complex64>::zeros(n);
    let par = Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<Complex64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    );
    let mut buf = MemBuffer::new(scratch);
    let solved = evd::self_adjoint_evd(
        sym.view(),
        values.as_mut(),
        Some(vectors.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    );
    if solved.is_err() {
        return Err(Error::NotConverged {
            residual: f64::INFINITY,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<f64> = (0..n).map(|i| values.as_ref()[i].re).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let eigenvalues = order.iter().map(|&i| raw[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| vectors[(i, order[j])]);
    let eig = HermitianEig {
        eigenvalues,
        eigenvectors,
    };

    let residual = eig.residual(&sym);
    if !(residual <= 1e-11 * sym.frobenius_norm().max(1.0)) {
        return Err(Error::NotConverged { residual });
    }
    Ok(eig)
}

/// Default skewness tolerance relative to `‖Ω‖_F`.
pub const DEFAULT_SKEW_TOLERANCE: f64 = 1e-8;

/// `exp(Ω)` for anti-Hermitian `Ω`, with the default skewness tolerance
/// `1e-8·‖Ω‖_F`.
pub fn expm_antihermitian(omega: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_antihermitian_with_tol(omega, DEFAULT_SKEW_TOLERANCE * omega.frobenius_norm())
}

/// `exp(Ω)` computed as `Q·diag(e^{−iλ})·Q†` from the eigendecomposition of
/// the Hermitian part of `iΩ`. The skew-Hermitian projection keeps the
/// result exactly unitary even when `Ω` is only approximately anti-Hermitian.
pub fn expm_antihermitian_with_tol(omega: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let residual = omega.anti_hermitian_residual();
    if !(residual <= tol) {
        return Err(Error::NotAntiHermitian {
            residual,
            tolerance: tol,
        });
    }
    let h = omega.scale(Complex64::new(0.0, 1.0));
    let eig = herm_eig(&h)?;
    Ok(eig.apply_function(|l| Complex64::from_polar(1.0, -l)))
}

/// Relative convergence tolerance of the power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-10;
/// Iteration cap before falling back to a full eigendecomposition.
pub const POWER_ITERATION_CAP: usize = 5000;

/// Deterministic start vector for the power iteration.
///
/// The all-ones vector is invariant under the grid reflection, so for
/// parity-symmetric operators it has no overlap with odd singular vectors.
/// A fixed aperiodic sequence avoids that while staying reproducible.
fn power_start_vector(n: usize) -> Vec<Complex64> {
    let golden = 0.618_033_988_749_894_9_f64;
    let v: Vec<Complex64> = (0..n)
        .map(|j| {
            let x = (j as f64 + 1.0) * golden;
            Complex64::new(1.0 + 0.5 * (x - x.floor()), 0.25 * (2.0 * x).sin())
        })
        .collect();
    normalize(v).0
}

fn normalize(mut v: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in &mut v {
            *z /= norm;
        }
    }
    (v, norm)
}

/// Largest singular value, by power iteration on `M†M` with a fallback to the
/// eigendecomposition of `M†M` when the iteration cap is hit.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let mut v = power_start_vector(m.dim);
    let mut previous = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let w = m.apply(&v);
        let estimate = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let (next, norm) = normalize(m.apply_adjoint(&w));
        if norm == 0.0 {
            return 0.0;
        }
        if (estimate - previous).abs() <= POWER_ITERATION_TOL * estimate {
            return estimate.sqrt();
        }
        previous = estimate;
        v = next;
    }
    spectral_norm_dense(m)
}

/// Spectral norm of a matrix that is Hermitian or anti-Hermitian up to
/// rounding, as the largest `|λ|` of its (skew-)Hermitian part. Falls back to
/// [`spectral_norm`] for anything else.
///
/// Nested commutators of Hermitian matrices are always of this kind, and an
/// eigenvalues-only solve is far cheaper than power iteration when the top
/// singular values cluster.
pub fn normal_spectral_norm(m: &ComplexMatrix) -> f64 {
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return 0.0;
    }
    let tol = 1e-10 * scale;
    let hermitian = if m.hermitian_residual() <= tol {
        m.clone()
    } else if m.anti_hermitian_residual() <= tol {
        m.scale(Complex64::new(0.0, 1.0))
    } else {
        return spectral_norm(m);
    };
    match herm_eigenvalues(&hermitian) {
        Some(values) => values.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        None => spectral_norm(m),
    }
}

/// Eigenvalues of `(M + M†)/2`, unsorted; `None` if the solver fails.
fn herm_eigenvalues(m: &ComplexMatrix) -> Option<Vec<f64>> {
    let n = m.dim;
    let sym = ComplexMatrix::from_fn(n, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
    let mut values = Diag::<Complex64>::zeros(n);
    let par = Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<Complex64>(
        n,
        ComputeEigenvectors::No,
        par,
        Default::default(),
    );
    let mut buf = MemBuffer::new(scratch);
    evd::self_adjoint_evd(
        sym.view(),
        values.as_mut(),
        None,
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .ok()?;
    Some((0..n).map(|i| values.as_ref()[i].re).collect())
}

/// Largest singular value from the full eigendecomposition of `M†M`.
pub fn spectral_norm_dense(m: &ComplexMatrix) -> f64 {
    let gram = adjoint_matmul(m, m);
    match herm_eig(&gram) {
        Ok(eig) => eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        // Frobenius norm is an upper bound and only reachable if faer fails.
        Err(_) => m.frobenius_norm(),
    }
}
