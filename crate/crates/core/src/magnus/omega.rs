//! Magnus terms `Ω_n` over one step `[t_j, t_j + h]`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::permutation::{descent_count, magnus_coefficient, Permutation};
use super::quadrature::{SimplexQuadrature, SimplexScheme};
use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{commutator, ComplexMatrix};

/// Default cap on the nominal `n!·Mⁿ·N³` multiply-add count of one `Ω_n`.
pub const DEFAULT_WORK_BUDGET: f64 = 5e11;

/// Upper bound on the number of partial sums in a parallel reduction; fixed
/// so that the summation order never depends on the worker count.
const REDUCTION_CHUNKS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaOptions {
    pub scheme: SimplexScheme,
    pub work_budget: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            scheme: SimplexScheme::NestedGaussLegendre,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }
}

/// Nominal cost of the permutation-sum evaluation: `n!` products of `n`
/// dense factors at each of the `Mⁿ` simplex points.
pub fn estimated_work(n: usize, quad_order: usize, dim: usize) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    factorial * (quad_order as f64).powi(n as i32) * (dim as f64).powi(3)
}

fn check_request(n: usize, quad_order: usize, h: f64, dim: usize, opts: &OmegaOptions) -> Result<()> {
    if n < 1 {
        return Err(Error::UnsupportedOrder("Magnus term index must be >= 1".into()));
    }
    if quad_order < 1 {
        return Err(Error::InvalidQuadrature("quadrature order must be >= 1".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step length must be positive, got {h}")));
    }
    let estimated = estimated_work(n, quad_order, dim);
    if estimated > opts.work_budget {
        return Err(Error::WorkBudget {
            estimated,
            budget: opts.work_budget,
        });
    }
    Ok(())
}

/// `Ω_n(t_j + h, t_j)` from the permutation-sum form
/// `Σ_π C_{π,n} ∫_simplex A(s_{π(1)})⋯A(s_{π(n)})`, `A = −iH`.
///
/// The innermost variable enters every product linearly, so for each outer
/// tuple `(s_1, …, s_{n−1})` its quadrature is folded into a single weighted
/// sum `Σ_k w_k H(s_n^k)` before the `n!` products are formed. Products are
/// accumulated per descent class and the exact rational coefficients are
/// applied once at the end.
pub fn omega_n<H: Hamiltonian + ?Sized>(
    ham: &H,
    t_start: f64,
    h: f64,
    n: usize,
    quad_order: usize,
    opts: &OmegaOptions,
) -> Result<ComplexMatrix> {
    let dim = ham.dim();
    check_request(n, quad_order, h, dim, opts)?;
    let simplex = SimplexQuadrature::new(opts.scheme, quad_order, t_start, t_start + h)?;

    // Permutations as 0-based index lists, grouped by descent count.
    let mut classes: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for p in Permutation::all(n) {
        let indices = p.image().iter().map(|&v| v - 1).collect();
        classes[descent_count(&p)].push(indices);
    }

    let outer = simplex.tuples(n - 1);
    let t_end = t_start + h;
    let chunk = outer.len().div_ceil(REDUCTION_CHUNKS).max(1);
    let partials: Vec<Vec<ComplexMatrix>> = outer
        .par_chunks(chunk)
        .map(|tuples| {
            let mut acc = vec![ComplexMatrix::zeros(dim); n];
            for (times, weight) in tuples {
                let upper = times.last().copied().unwrap_or(t_end);
                let (nodes, weights) = simplex.level(upper);
                if nodes.is_empty() {
                    continue;
                }
                let mut factors: Vec<ComplexMatrix> = times.iter().map(|&s| ham.at(s)).collect();
                factors.push(ham.weighted_sum(&nodes, &weights));
                let w = Complex64::new(*weight, 0.0);
                for (class, sink) in classes.iter().zip(acc.iter_mut()) {
                    for perm in class {
                        let mut product = factors[perm[0]].clone();
                        for &idx in &perm[1..] {
                            product = &product * &factors[idx];
                        }
                        sink.axpy(w, &product);
                    }
                }
            }
            acc
        })
        .collect();

    let mut sums = vec![ComplexMatrix::zeros(dim); n];
    for part in partials {
        for (s, p) in sums.iter_mut().zip(&part) {
            *s += p;
        }
    }

    let mut omega = ComplexMatrix::zeros(dim);
    for (d, s) in sums.iter().enumerate() {
        if classes[d].is_empty() {
            continue;
        }
        let c = magnus_coefficient(n, d)?;
        omega.axpy(Complex64::new(c.to_f64(), 0.0), s);
    }
    Ok(omega.scale(minus_i_pow(n)))
}

/// `(−i)^n`, exact.
fn minus_i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `Ω_1`, `Ω_2`, `Ω_3` from their nested-commutator forms
///
/// * `Ω_1 = ∫ A(t_1)`
/// * `Ω_2 = ½ ∫∫ [A(t_1), A(t_2)]`
/// * `Ω_3 = ⅙ ∫∫∫ ([A(t_1), [A(t_2), A(t_3)]] + [A(t_3), [A(t_2), A(t_1)]])`
///
/// evaluated point by point over the same simplex quadrature, with no
/// factoring of the inner integral. Independent cross-check for [`omega_n`].
pub fn omega_reference<H: Hamiltonian + ?Sized>(
    ham: &H,
    t_start: f64,
    h: f64,
    n: usize,
    quad_order: usize,
    opts: &OmegaOptions,
) -> Result<ComplexMatrix> {
    if n > 3 {
        return Err(Error::UnsupportedOrder(format!(
            "reference Magnus terms exist for n <= 3, got {n}"
        )));
    }
    if n == 1 {
        return omega_n(ham, t_start, h, 1, quad_order, opts);
    }
    let dim = ham.dim();
    check_request(n, quad_order, h, dim, opts)?;
    let simplex = SimplexQuadrature::new(opts.scheme, quad_order, t_start, t_start + h)?;
    let points = simplex.tuples(n);
    let chunk = points.len().div_ceil(REDUCTION_CHUNKS).max(1);
    let partials: Vec<ComplexMatrix> = points
        .par_chunks(chunk)
        .map(|pts| {
            let mut acc = ComplexMatrix::zeros(dim);
            for (s, w) in pts {
                let hs: Vec<ComplexMatrix> = s.iter().map(|&t| ham.at(t)).collect();
                let term = if n == 2 {
                    commutator(&hs[0], &hs[1])
                } else {
                    let mut t = commutator(&hs[0], &commutator(&hs[1], &hs[2]));
                    t += &commutator(&hs[2], &commutator(&hs[1], &hs[0]));
                    t
                };
                acc.axpy(Complex64::new(*w, 0.0), &term);
            }
            acc
        })
        .collect();
    let mut total = ComplexMatrix::zeros(dim);
    for p in &partials {
        total += p;
    }
    let scale = if n == 2 { 0.5 } else { 1.0 / 6.0 };
    Ok(total.scale(minus_i_pow(n) * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
    use crate::magnus::FnHamiltonian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m + &m.adjoint()).scale_real(0.5)
    }

    #[test]
    fn first_term_constant_potential() {
        let o = InteractionOracle::schrodinger(8, &PotentialSpec::Constant(0.6), Frame::Position)
            .unwrap();
        let h = 0.3;
        let omega = omega_n(&o, 0.0, h, 1, 16, &OmegaOptions::default()).unwrap();
        let expected = ComplexMatrix::identity(8).scale(Complex64::new(0.0, -0.6 * h));
        assert!((&omega - &expected).max_abs() < 1e-14);
        let reference = omega_reference(&o, 0.0, h, 1, 16, &OmegaOptions::default()).unwrap();
        assert_eq!(omega, reference);
    }

    #[test]
    fn higher_terms_vanish_when_commuting() {
        let o = InteractionOracle::schrodinger(8, &PotentialSpec::Constant(0.6), Frame::Eigen)
            .unwrap();
        for n in 2..=3 {
            let omega = omega_n(&o, 0.1, 0.4, n, 8, &OmegaOptions::default()).unwrap();
            assert!(omega.max_abs() < 1e-12, "n = {n}");
            let r = omega_reference(&o, 0.1, 0.4, n, 8, &OmegaOptions::default()).unwrap();
            assert!(r.max_abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn permutation_sum_matches_commutator_form_schrodinger() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Position).unwrap();
        let opts = OmegaOptions::default();
        let o2 = omega_n(&o, 0.0, 0.4, 2, 32, &opts).unwrap();
        let r2 = omega_reference(&o, 0.0, 0.4, 2, 32, &opts).unwrap();
        assert!((&o2 - &r2).max_abs() <= 1e-10);
        let o3 = omega_n(&o, 0.0, 0.4, 3, 32, &opts).unwrap();
        let r3 = omega_reference(&o, 0.0, 0.4, 3, 32, &opts).unwrap();
        assert!((&o3 - &r3).max_abs() <= 1e-8);
        assert!(o3.max_abs() > 1e-8, "third term should not be trivially zero");
    }

    #[test]
    fn permutation_sum_matches_commutator_form_dense_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h0 = random_hermitian(&mut rng, 8);
        let h1 = random_hermitian(&mut rng, 8);
        let h2 = random_hermitian(&mut rng, 8);
        let ham = FnHamiltonian::new(8, move |t: f64| {
            let mut m = h0.clone();
            m.axpy(Complex64::new(t.sin(), 0.0), &h1);
            m.axpy(Complex64::new(t * t, 0.0), &h2);
            m
        });
        for scheme in [SimplexScheme::NestedGaussLegendre, SimplexScheme::TriangularFilter] {
            let opts = OmegaOptions {
                scheme,
                ..Default::default()
            };
            let o3 = omega_n(&ham, 0.2, 0.5, 3, 12, &opts).unwrap();
            let r3 = omega_reference(&ham, 0.2, 0.5, 3, 12, &opts).unwrap();
            assert!((&o3 - &r3).max_abs() <= 1e-8);
        }
    }

    #[test]
    fn anti_hermitian_outputs() {
        let o = InteractionOracle::schrodinger(32, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        for n in 1..=3 {
            let omega = omega_n(&o, 0.0, 0.5, n, 12, &OmegaOptions::default()).unwrap();
            let skew = omega.anti_hermitian_residual();
            assert!(skew <= 1e-8 * omega.frobenius_norm() + 1e-12);
        }
    }

    #[test]
    fn quadrature_refinement_is_cauchy() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        let opts = OmegaOptions::default();
        let at = |m| omega_n(&o, 0.0, 0.8, 2, m, &opts).unwrap();
        let (a, b, c) = (at(2), at(4), at(8));
        let first = (&b - &a).frobenius_norm();
        let second = (&c - &b).frobenius_norm();
        assert!(second <= first);
    }

    #[test]
    fn second_term_against_closed_form() {
        // H(t) = X + t·Y gives Ω_2 = −½∫∫ [X + t1 Y, X + t2 Y] = (h³/12)·[X, Y].
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_hermitian(&mut rng, 4);
        let y = random_hermitian(&mut rng, 4);
        let (xc, yc) = (x.clone(), y.clone());
        let ham = FnHamiltonian::new(4, move |t: f64| {
            let mut m = xc.clone();
            m.axpy(Complex64::new(t, 0.0), &yc);
            m
        });
        let h = 0.7;
        let got = omega_n(&ham, 0.0, h, 2, 4, &OmegaOptions::default()).unwrap();
        let expected = commutator(&x, &y).scale_real(h * h * h / 12.0);
        assert!((&got - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn budget_refusal() {
        let o = InteractionOracle::schrodinger(128, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        let err = omega_n(&o, 0.0, 0.1, 3, 256, &OmegaOptions::default()).unwrap_err();
        assert!(matches!(err, Error::WorkBudget { .. }));
        assert!(omega_reference(&o, 0.0, 0.1, 4, 2, &OmegaOptions::default()).is_err());
        assert!(omega_n(&o, 0.0, 0.1, 0, 2, &OmegaOptions::default()).is_err());
    }
}
