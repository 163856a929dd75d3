use num_complex::Complex64;

use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{expm_antihermitian, ComplexMatrix};

/// Brute-force time-ordered exponential `𝒯 exp(−i∫_a^b H(s) ds)` as the
/// midpoint product `∏_{k=K−1..0} exp(−i H(m_k) δ)`, `δ = (b − a)/K`.
/// Second order in `δ`; used only as an independent oracle.
pub fn time_ordered_oracle<H: Hamiltonian + ?Sized>(
    ham: &H,
    a: f64,
    b: f64,
    slices: usize,
) -> Result<ComplexMatrix> {
    if slices < 1 {
        return Err(Error::InvalidInput("need at least one slice".into()));
    }
    let delta = (b - a) / slices as f64;
    let mut total = ComplexMatrix::identity(ham.dim());
    for k in 0..slices {
        let mid = a + (k as f64 + 0.5) * delta;
        let generator = ham.at(mid).scale(Complex64::new(0.0, -delta));
        total = &expm_antihermitian(&generator)? * &total;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
    use crate::linalg::{herm_eig, spectral_norm};
    use crate::magnus::FnHamiltonian;

    #[test]
    fn constant_generator_single_slice() {
        let h = ComplexMatrix::from_real_row_major(2, &[0.3, 0.2, 0.2, -0.1]).unwrap();
        let hc = h.clone();
        let ham = FnHamiltonian::new(2, move |_| hc.clone());
        let u = time_ordered_oracle(&ham, 0.0, 1.5, 1).unwrap();
        let expected = herm_eig(&h)
            .unwrap()
            .apply_function(|l| Complex64::from_polar(1.0, -1.5 * l));
        assert!((&u - &expected).frobenius_norm() < 1e-10);
    }

    #[test]
    fn zero_generator() {
        let ham = FnHamiltonian::new(3, |_| ComplexMatrix::zeros(3));
        let u = time_ordered_oracle(&ham, 0.0, 2.0, 7).unwrap();
        assert_eq!(u, ComplexMatrix::identity(3));
        assert!(time_ordered_oracle(&ham, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn agrees_with_exact_interaction_step() {
        let o = InteractionOracle::schrodinger(32, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        let u = time_ordered_oracle(&o, 0.0, 0.4, 4096).unwrap();
        let exact = o.exact_step(0.0, 0.4).unwrap();
        assert!(spectral_norm(&(&u - &exact)) <= 1e-6);
        assert!(u.unitarity_defect() <= 1e-9);
    }

    #[test]
    fn midpoint_self_convergence() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Cos, Frame::Eigen).unwrap();
        let reference = time_ordered_oracle(&o, 0.0, 0.8, 8192).unwrap();
        let err = |k| spectral_norm(&(&time_ordered_oracle(&o, 0.0, 0.8, k).unwrap() - &reference));
        let ratio = err(32) / err(64);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
