use super::omega::{omega_n, OmegaOptions, DEFAULT_WORK_BUDGET};
use super::quadrature::SimplexScheme;
use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{expm_antihermitian, ComplexMatrix};

/// Truncation order and quadrature settings for one Magnus step.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnusStepConfig {
    /// Number of Magnus terms kept, `p ≥ 1`.
    pub order: usize,
    /// Gauss-Legendre nodes per level for `Ω_1, Ω_2, …`.
    pub quad_orders: Vec<usize>,
    pub scheme: SimplexScheme,
    pub work_budget: f64,
}

impl MagnusStepConfig {
    pub fn new(order: usize, quad_orders: Vec<usize>) -> Self {
        Self {
            order,
            quad_orders,
            scheme: SimplexScheme::NestedGaussLegendre,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::UnsupportedOrder("Magnus order must be >= 1".into()));
        }
        if self.quad_orders.len() < self.order {
            return Err(Error::InvalidQuadrature(format!(
                "order {} needs {} quadrature orders, got {}",
                self.order,
                self.order,
                self.quad_orders.len()
            )));
        }
        if self.quad_orders.iter().any(|&m| m < 1) {
            return Err(Error::InvalidQuadrature("quadrature orders must be >= 1".into()));
        }
        Ok(())
    }

    fn omega_options(&self) -> OmegaOptions {
        OmegaOptions {
            scheme: self.scheme,
            work_budget: self.work_budget,
        }
    }
}

/// Truncated exponent `Ω_(p) = Σ_{n=1}^{p} Ω_n` over `[t_j, t_j + h]`.
pub fn magnus_exponent<H: Hamiltonian + ?Sized>(
    ham: &H,
    t_j: f64,
    h: f64,
    config: &MagnusStepConfig,
) -> Result<ComplexMatrix> {
    config.validate()?;
    let opts = config.omega_options();
    let mut omega = ComplexMatrix::zeros(ham.dim());
    for n in 1..=config.order {
        omega += &omega_n(ham, t_j, h, n, config.quad_orders[n - 1], &opts)?;
    }
    Ok(omega)
}

/// Per-step Magnus unitary `exp(Ω_(p)(t_j + h, t_j))`.
pub fn magnus_step<H: Hamiltonian + ?Sized>(
    ham: &H,
    t_j: f64,
    h: f64,
    config: &MagnusStepConfig,
) -> Result<ComplexMatrix> {
    expm_antihermitian(&magnus_exponent(ham, t_j, h, config)?)
}

/// `U_p(T, 0) = U_p(t_L, t_{L−1})⋯U_p(t_1, t_0)` with `t_k = kT/L`.
pub fn compose_global<H: Hamiltonian + ?Sized>(
    ham: &H,
    t_final: f64,
    steps: usize,
    config: &MagnusStepConfig,
) -> Result<ComplexMatrix> {
    if steps < 1 {
        return Err(Error::InvalidInput("need at least one step".into()));
    }
    let h = t_final / steps as f64;
    let mut total = ComplexMatrix::identity(ham.dim());
    for k in 0..steps {
        let step = magnus_step(ham, k as f64 * h, h, config)?;
        total = &step * &total;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
    use crate::linalg::spectral_norm;
    use num_complex::Complex64;

    #[test]
    fn config_validation() {
        assert!(MagnusStepConfig::new(0, vec![4]).validate().is_err());
        assert!(MagnusStepConfig::new(2, vec![4]).validate().is_err());
        assert!(MagnusStepConfig::new(2, vec![4, 0]).validate().is_err());
        assert!(MagnusStepConfig::new(2, vec![4, 4, 4]).validate().is_ok());
    }

    #[test]
    fn constant_potential_step_is_a_phase() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Constant(0.3), Frame::Position)
            .unwrap();
        for p in 1..=3 {
            let u = magnus_step(&o, 0.2, 0.5, &MagnusStepConfig::new(p, vec![8, 6, 4])).unwrap();
            let expected = ComplexMatrix::identity(16).scale(Complex64::from_polar(1.0, -0.15));
            assert!((&u - &expected).frobenius_norm() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn zero_potential_is_identity() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::Zero, Frame::Eigen).unwrap();
        let cfg = MagnusStepConfig::new(2, vec![8, 8]);
        let u = magnus_step(&o, 0.0, 0.5, &cfg).unwrap();
        assert!((&u - &ComplexMatrix::identity(16)).max_abs() < 1e-15);
        let g = compose_global(&o, 1.0, 4, &cfg).unwrap();
        assert!((&g - &ComplexMatrix::identity(16)).max_abs() < 1e-14);
    }

    #[test]
    fn single_step_global_equals_step() {
        let o = InteractionOracle::schrodinger(16, &PotentialSpec::HalfCos, Frame::Eigen).unwrap();
        let cfg = MagnusStepConfig::new(2, vec![16, 16]);
        let g = compose_global(&o, 0.7, 1, &cfg).unwrap();
        let s = magnus_step(&o, 0.0, 0.7, &cfg).unwrap();
        assert_eq!(g, s);
        assert!(compose_global(&o, 0.7, 0, &cfg).is_err());
    }

    #[test]
    fn unitarity_and_global_first_order_convergence() {
        let o = InteractionOracle::schrodinger(32, &PotentialSpec::HalfCos, Frame::Eigen).unwrap();
        let exact = o.exact_step(0.0, 1.0).unwrap();
        let cfg = MagnusStepConfig::new(1, vec![64]);
        let mut errors = Vec::new();
        for l in [4usize, 8, 16, 32] {
            let u = compose_global(&o, 1.0, l, &cfg).unwrap();
            assert!(u.unitarity_defect() <= 1e-9);
            errors.push(spectral_norm(&(&u - &exact)));
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
        }
    }

    #[test]
    fn position_and_eigen_frames_agree_on_errors() {
        let p = InteractionOracle::schrodinger(16, &PotentialSpec::HalfCos, Frame::Position).unwrap();
        let e = p.with_frame(Frame::Eigen);
        let cfg = MagnusStepConfig::new(2, vec![32, 16]);
        let err = |o: &InteractionOracle| {
            let u = magnus_step(o, 0.0, 0.4, &cfg).unwrap();
            spectral_norm(&(&u - &o.exact_step(0.0, 0.4).unwrap()))
        };
        let (a, b) = (err(&p), err(&e));
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
    }
}
