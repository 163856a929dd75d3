//! Sparse square matrices stored by cyclic diagonal.
//!
//! In the kinetic eigenbasis a band-limited potential couples only a few
//! Fourier offsets, so `H_I(t)` and its nested commutators have a handful of
//! non-zero cyclic diagonals. Products then cost `O(N · bands²)` instead of
//! `O(N³)`, and norms come from a Lanczos iteration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{herm_eig, normal_spectral_norm, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Matrix with entries `M[k][(k + a) mod N] = bands[a][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicBandMatrix {
    dim: usize,
    bands: BTreeMap<usize, Vec<Complex64>>,
}

impl CyclicBandMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            bands: BTreeMap::new(),
        }
    }

    /// From `(row, col, value)` triples; repeated positions are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut m = Self::zeros(dim);
        for (k, l, v) in entries {
            let offset = (l + dim - k) % dim;
            m.bands.entry(offset).or_insert_with(|| vec![ZERO; dim])[k] += v;
        }
        m
    }

    /// Non-zero entries of a dense matrix.
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let entries = (0..n)
            .flat_map(|k| (0..n).map(move |l| (k, l)))
            .map(|(k, l)| (k, l, m.get(k, l)))
            .filter(|&(_, _, v)| v != ZERO);
        Self::from_entries(n, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored cyclic offsets, ascending.
    pub fn offsets(&self) -> Vec<usize> {
        self.bands.keys().copied().collect()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let offset = (col + self.dim - row) % self.dim;
        self.bands.get(&offset).map_or(ZERO, |b| b[row])
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for (&a, band) in &self.bands {
            for (k, &v) in band.iter().enumerate() {
                m.set(k, (k + a) % n, v);
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.bands
            .values()
            .flat_map(|b| b.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.bands
            .values()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `sqrt(‖M‖_1·‖M‖_∞)`, an upper bound on the spectral norm.
    pub fn norm_upper_bound(&self) -> f64 {
        let n = self.dim;
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for (&a, band) in &self.bands {
            for (k, z) in band.iter().enumerate() {
                let m = z.norm();
                rows[k] += m;
                cols[(k + a) % n] += m;
            }
        }
        let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        (max(rows) * max(cols)).sqrt()
    }

    /// `‖M − sign·M†‖_F` with `sign = ±1`.
    fn symmetry_residual(&self, sign: f64) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for (&a, band) in &self.bands {
            for (k, &v) in band.iter().enumerate() {
                let mirror = self.get((k + a) % n, k).conj();
                acc += (v - mirror * sign).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.symmetry_residual(1.0)
    }

    pub fn anti_hermitian_residual(&self) -> f64 {
        self.symmetry_residual(-1.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            bands: self
                .bands
                .iter()
                .map(|(&a, b)| (a, b.iter().map(|&z| z * s).collect()))
                .collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut w = vec![ZERO; n];
        for (&a, band) in &self.bands {
            for k in 0..n {
                w[k] += band[k] * v[(k + a) % n];
            }
        }
        w
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "band matmul dimension mismatch");
        let n = self.dim;
        let mut out: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (&a, x) in &self.bands {
            for (&b, y) in &rhs.bands {
                let z = out.entry((a + b) % n).or_insert_with(|| vec![ZERO; n]);
                for k in 0..n {
                    z[k] += x[k] * y[(k + a) % n];
                }
            }
        }
        Self { dim: n, bands: out }
    }

    /// `[self, rhs]`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        let mut out = self.matmul(rhs);
        for (a, band) in rhs.matmul(self).bands {
            let z = out.bands.entry(a).or_insert_with(|| vec![ZERO; self.dim]);
            for (zk, bk) in z.iter_mut().zip(band) {
                *zk -= bk;
            }
        }
        out
    }

    /// Spectral norm of a Hermitian or anti-Hermitian band matrix (up to
    /// rounding) by Lanczos; anything else is densified.
    pub fn normal_spectral_norm(&self) -> f64 {
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            return 0.0;
        }
        let tol = 1e-10 * scale;
        let hermitian = if self.hermitian_residual() <= tol {
            self.clone()
        } else if self.anti_hermitian_residual() <= tol {
            self.scale(Complex64::new(0.0, 1.0))
        } else {
            return normal_spectral_norm(&self.to_dense());
        };
        lanczos_max_abs_eigenvalue(&hermitian).unwrap_or_else(|| normal_spectral_norm(&self.to_dense()))
    }
}

/// Below this size the dense solver is cheap and used directly.
const LANCZOS_MIN_DIM: usize = 48;
const LANCZOS_MAX_STEPS: usize = 400;
const LANCZOS_CHECK_EVERY: usize = 8;
/// Ritz residual, relative to the largest `|θ|`, at which both ends count as
/// converged.
const LANCZOS_TOL: f64 = 1e-12;

/// Largest `|λ|` of a Hermitian band matrix, from a Lanczos run with full
/// reorthogonalization and a fixed pseudo-random start. `None` asks the caller
/// to fall back to a dense solve.
fn lanczos_max_abs_eigenvalue(m: &CyclicBandMatrix) -> Option<f64> {
    let n = m.dim();
    if n < LANCZOS_MIN_DIM {
        return None;
    }
    let max_steps = n.min(LANCZOS_MAX_STEPS);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = norm2(&v);
    v.iter_mut().for_each(|z| *z /= norm);

    let scale = m.frobenius_norm();
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..max_steps {
        let mut w = m.apply(&basis[j]);
        alpha.push(dot(&basis[j], &w).re);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wk, qk) in w.iter_mut().zip(q) {
                    *wk -= c * qk;
                }
            }
        }
        let b = norm2(&w);
        let invariant = b <= 1e-14 * scale;
        if (j + 1) % LANCZOS_CHECK_EVERY == 0 || invariant || j + 1 == max_steps {
            let (estimate, residual) = extreme_ritz(&alpha, &beta, b)?;
            if invariant || residual <= LANCZOS_TOL * estimate {
                return Some(estimate);
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|z| *z /= b);
        basis.push(w);
    }
    None
}

/// Largest `|θ|` over the Ritz values of the Lanczos tridiagonal, and the
/// larger of the two end-point residual bounds `β·|s_last|`.
fn extreme_ritz(alpha: &[f64], beta: &[f64], next_beta: f64) -> Option<(f64, f64)> {
    let k = alpha.len();
    let mut t = ComplexMatrix::zeros(k);
    for i in 0..k {
        t.set(i, i, Complex64::new(alpha[i], 0.0));
        if i + 1 < k {
            t.set(i, i + 1, Complex64::new(beta[i], 0.0));
            t.set(i + 1, i, Complex64::new(beta[i], 0.0));
        }
    }
    let eig = herm_eig(&t).ok()?;
    let residual = |idx: usize| next_beta * eig.eigenvectors.get(k - 1, idx).norm();
    let estimate = eig.eigenvalues[0].abs().max(eig.eigenvalues[k - 1].abs());
    Some((estimate, residual(0).max(residual(k - 1))))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
