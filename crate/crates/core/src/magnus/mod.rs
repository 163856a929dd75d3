//! Magnus-series machinery for `U' = −iH(t)U`.
//!
//! All public Ω values follow the convention `U = exp(Ω)` with generator
//! `A(t) = −iH(t)`; the conversion from `H` happens inside the builders.

mod nested;
mod omega;
mod permutation;
mod quadrature;
mod step;
mod time_ordered;

pub use nested::{eval_commutator_tree, left_normed_comm, CommutatorTree};
pub use omega::{estimated_work, omega_n, omega_reference, OmegaOptions, DEFAULT_WORK_BUDGET};
pub use permutation::{descent_count, magnus_coefficient, MagnusCoefficient, Permutation};
pub use quadrature::{gauss_legendre, QuadratureRule, SimplexQuadrature, SimplexScheme};
pub use step::{compose_global, magnus_exponent, magnus_step, MagnusStepConfig};
pub use time_ordered::time_ordered_oracle;

use crate::linalg::ComplexMatrix;
use num_complex::Complex64;

/// A time-dependent Hermitian generator `t ↦ H(t)`.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    /// `H(t)`.
    fn at(&self, t: f64) -> ComplexMatrix;

    /// `Σ_j w_j H(s_j)`. Implementations may override this with a faster
    /// route; the result must agree with the default to round-off.
    fn weighted_sum(&self, nodes: &[f64], weights: &[f64]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (&s, &w) in nodes.iter().zip(weights) {
            acc.axpy(Complex64::new(w, 0.0), &self.at(s));
        }
        acc
    }
}

/// Adapts a closure into a [`Hamiltonian`].
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> ComplexMatrix + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> ComplexMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        (self.f)(t)
    }
}
