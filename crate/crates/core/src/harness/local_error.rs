use super::{run_cells, timed, Experiment, ResultRow, RunOptions};
use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::magnus::{magnus_step, MagnusStepConfig, SimplexScheme, DEFAULT_WORK_BUDGET};

/// Single-step error sweep against the exact propagator.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalErrorConfig {
    pub orders: Vec<usize>,
    pub n: usize,
    /// Strictly decreasing step sizes.
    pub dt_values: Vec<f64>,
    /// Gauss-Legendre nodes per level for `Ω_1, Ω_2, …`; levels past the end
    /// reuse the last entry.
    pub quad_orders: Vec<usize>,
    pub potential: PotentialSpec,
    pub t0: f64,
    pub scheme: SimplexScheme,
    pub frame: Frame,
    pub work_budget: f64,
}

impl Default for LocalErrorConfig {
    fn default() -> Self {
        Self {
            orders: vec![1, 2],
            n: 128,
            dt_values: vec![0.8, 0.4, 0.2, 0.1],
            quad_orders: vec![512, 256],
            potential: PotentialSpec::HalfCos,
            t0: 0.0,
            scheme: SimplexScheme::NestedGaussLegendre,
            frame: Frame::Eigen,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }
}

impl LocalErrorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.dt_values.is_empty() {
            return Err(Error::InvalidInput("need at least one order and one dt".into()));
        }
        if self.dt_values.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
            return Err(Error::InvalidInput("dt values must be positive".into()));
        }
        if self.dt_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("dt values must be strictly decreasing".into()));
        }
        if self.quad_orders.is_empty() {
            return Err(Error::InvalidQuadrature("need at least one quadrature order".into()));
        }
        for &p in &self.orders {
            self.step_config(p).validate()?;
        }
        Ok(())
    }

    pub fn step_config(&self, order: usize) -> MagnusStepConfig {
        MagnusStepConfig {
            order,
            quad_orders: extend_orders(&self.quad_orders, order),
            scheme: self.scheme,
            work_budget: self.work_budget,
        }
    }
}

/// First `len` entries of `orders`, padding with its last entry.
pub(crate) fn extend_orders(orders: &[usize], len: usize) -> Vec<usize> {
    let last = orders.last().copied().unwrap_or(1);
    (0..len.max(orders.len()))
        .map(|i| orders.get(i).copied().unwrap_or(last))
        .collect()
}

/// `‖U_p(t0 + Δt, t0) − U(t0 + Δt, t0)‖₂` for every `(p, Δt)`.
pub fn run_local_error(cfg: &LocalErrorConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let oracle = InteractionOracle::schrodinger(cfg.n, &cfg.potential, cfg.frame)?;
    let cells: Vec<(usize, f64)> = cfg
        .orders
        .iter()
        .flat_map(|&p| cfg.dt_values.iter().map(move |&dt| (p, dt)))
        .collect();
    run_cells(opts, cells, |(p, dt)| {
        let ((error, defect), seconds) = timed(opts, || {
            let step = magnus_step(&oracle, cfg.t0, dt, &cfg.step_config(p))?;
            let exact = oracle.exact_step(cfg.t0, dt)?;
            let defect = step.unitarity_defect().max(exact.unitarity_defect());
            Ok((spectral_norm(&(&step - &exact)), defect))
        })?;
        let row = ResultRow {
            experiment: Experiment::MagnusLocal,
            order: p,
            n: cfg.n,
            x: dt,
            value: error,
            seconds,
            unitarity_defect: Some(defect),
        };
        row.validate()?;
        Ok(row)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> LocalErrorConfig {
        LocalErrorConfig {
            n: 16,
            dt_values: vec![0.4, 0.2],
            quad_orders: vec![24, 12],
            ..Default::default()
        }
    }

    #[test]
    fn default_sweep() {
        let cfg = LocalErrorConfig::default();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.quad_orders, vec![512, 256]);
        assert_eq!(cfg.potential, PotentialSpec::HalfCos);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn dt_must_decrease() {
        let cfg = LocalErrorConfig {
            dt_values: vec![0.1, 0.2],
            ..small()
        };
        assert!(cfg.validate().is_err());
        let cfg = LocalErrorConfig {
            dt_values: vec![0.2, 0.2],
            ..small()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn quadrature_orders_padded() {
        assert_eq!(extend_orders(&[512, 256], 3), vec![512, 256, 256]);
        assert_eq!(extend_orders(&[512, 256], 1), vec![512, 256]);
    }

    #[test]
    fn zero_potential_is_exact() {
        let cfg = LocalErrorConfig {
            potential: PotentialSpec::Zero,
            ..small()
        };
        for row in run_local_error(&cfg, &RunOptions::default()).unwrap() {
            assert!(row.value <= 1e-11);
            assert!(row.unitarity_defect.unwrap() <= 1e-9);
        }
    }

    #[test]
    fn errors_shrink_with_dt() {
        let rows = run_local_error(&small(), &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[1].value < rows[0].value && rows[3].value < rows[2].value);
        assert!(rows[2].value < rows[0].value);
    }
}
