use super::local_error::extend_orders;
use super::{run_cells, timed, Experiment, ResultRow, RunOptions};
use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::magnus::{compose_global, MagnusStepConfig, SimplexScheme, DEFAULT_WORK_BUDGET};

/// Global error over `[0, T]` as the step count grows.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalErrorConfig {
    pub orders: Vec<usize>,
    pub t_final: f64,
    pub steps: Vec<usize>,
    pub n: usize,
    pub quad_orders: Vec<usize>,
    pub potential: PotentialSpec,
    pub scheme: SimplexScheme,
    pub frame: Frame,
    pub work_budget: f64,
}

impl Default for GlobalErrorConfig {
    fn default() -> Self {
        Self {
            orders: vec![1, 2],
            t_final: 1.0,
            steps: vec![4, 8, 16, 32],
            n: 64,
            quad_orders: vec![512, 256],
            potential: PotentialSpec::HalfCos,
            scheme: SimplexScheme::NestedGaussLegendre,
            frame: Frame::Eigen,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }
}

impl GlobalErrorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.steps.is_empty() {
            return Err(Error::InvalidInput("need at least one order and one step count".into()));
        }
        if self.steps.iter().any(|&l| l < 1) {
            return Err(Error::InvalidInput("step counts must be >= 1".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("T = {} must be positive", self.t_final)));
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

/// `‖U_p(T, 0) − U(T, 0)‖₂` for every `(p, L)`; rows carry `h = T/L`.
pub fn run_global_error(cfg: &GlobalErrorConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let oracle = InteractionOracle::schrodinger(cfg.n, &cfg.potential, cfg.frame)?;
    let exact = oracle.exact_step(0.0, cfg.t_final)?;
    let exact_defect = exact.unitarity_defect();
    let cells: Vec<(usize, usize)> = cfg
        .orders
        .iter()
        .flat_map(|&p| cfg.steps.iter().map(move |&l| (p, l)))
        .collect();
    run_cells(opts, cells, |(p, l)| {
        let ((error, defect), seconds) = timed(opts, || {
            let u = compose_global(&oracle, cfg.t_final, l, &cfg.step_config(p))?;
            Ok((spectral_norm(&(&u - &exact)), u.unitarity_defect().max(exact_defect)))
        })?;
        let row = ResultRow {
            experiment: Experiment::MagnusGlobal,
            order: p,
            n: cfg.n,
            x: cfg.t_final / l as f64,
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
    use crate::harness::local_error::{run_local_error, LocalErrorConfig};

    #[test]
    fn single_step_matches_local_row() {
        let global = GlobalErrorConfig {
            orders: vec![2],
            steps: vec![1],
            n: 16,
            quad_orders: vec![24, 12],
            ..Default::default()
        };
        let local = LocalErrorConfig {
            orders: vec![2],
            n: 16,
            dt_values: vec![1.0],
            quad_orders: vec![24, 12],
            ..Default::default()
        };
        let g = run_global_error(&global, &RunOptions::default()).unwrap();
        let l = run_local_error(&local, &RunOptions::default()).unwrap();
        assert_eq!(g[0].value, l[0].value);
        assert_eq!(g[0].x, 1.0);
    }

    #[test]
    fn zero_potential_is_exact() {
        let cfg = GlobalErrorConfig {
            n: 12,
            steps: vec![2, 4],
            quad_orders: vec![8, 6],
            potential: PotentialSpec::Zero,
            ..Default::default()
        };
        for row in run_global_error(&cfg, &RunOptions::default()).unwrap() {
            assert!(row.value <= 1e-11);
        }
    }

    #[test]
    fn rejects_zero_steps() {
        let cfg = GlobalErrorConfig {
            steps: vec![0],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
