//! Convergence experiments, slope fits, acceptance checks and output files.

pub mod checks;
pub mod comm_scaling;
pub mod emit;
pub mod fit;
pub mod global_error;
pub mod local_error;
pub mod verify;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use checks::{CheckOutcome, Thresholds};
pub use comm_scaling::{run_comm_scaling, Bracketing, CommScalingConfig};
pub use emit::{emit_results, EmittedFiles};
pub use fit::{fit_loglog_slope, fit_with_refit, FitReport, SlopeFit};
pub use global_error::{run_global_error, GlobalErrorConfig};
pub use local_error::{run_local_error, LocalErrorConfig};
pub use verify::{run_verification_suite, VerificationReport};

/// Which experiment family a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    CommScaling,
    MagnusLocal,
    MagnusGlobal,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::CommScaling => "commscaling",
            Experiment::MagnusLocal => "magnus_local",
            Experiment::MagnusGlobal => "magnus_global",
        }
    }

    /// Reference slopes drawn as guide lines.
    pub fn guide_slopes(self) -> [f64; 2] {
        match self {
            Experiment::CommScaling => [3.0, 4.0],
            Experiment::MagnusLocal => [3.0, 5.0],
            Experiment::MagnusGlobal => [2.0, 4.0],
        }
    }
}

/// One measured point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: Experiment,
    /// Layer count for commutator rows, Magnus order `p` otherwise.
    pub order: usize,
    pub n: usize,
    /// `h` or `Δt`.
    pub x: f64,
    /// Max spectral norm or propagator error.
    pub value: f64,
    /// Wall time of the cell; zero unless timings were requested.
    pub seconds: f64,
    /// `‖U†U − I‖_F` of the propagators behind the row, when there are any.
    pub unitarity_defect: Option<f64>,
}

impl ResultRow {
    fn validate(&self) -> Result<()> {
        if !(self.value >= 0.0 && self.value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{} row at x = {} has non-finite value {}",
                self.experiment.id(),
                self.x,
                self.value
            )));
        }
        Ok(())
    }
}

/// Worker-pool settings shared by all experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
    /// Fill `ResultRow::seconds`. Off by default so output files are
    /// reproducible byte for byte.
    pub record_timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            record_timings: false,
        }
    }
}

/// Evaluate independent cells on a bounded pool; results come back in input
/// order.
pub(crate) fn run_cells<C, R, F>(opts: &RunOptions, cells: Vec<C>, f: F) -> Result<Vec<R>>
where
    C: Send,
    R: Send,
    F: Fn(C) -> Result<R> + Sync + Send,
{
    if opts.workers < 1 {
        return Err(Error::InvalidInput("workers must be >= 1".into()));
    }
    if opts.workers == 1 {
        return cells.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cells.into_par_iter().map(f).collect())
}

/// Run `f`, returning its value and elapsed seconds (or 0 when not timing).
pub(crate) fn timed<T>(opts: &RunOptions, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    let seconds = if opts.record_timings {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok((value, seconds))
}

/// Fit `value` against `x` for every `(order, N)` series, in first-seen order.
pub fn fit_series(rows: &[ResultRow]) -> Result<Vec<SeriesFit>> {
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.order, r.n)) {
            keys.push((r.order, r.n));
        }
    }
    keys.into_iter()
        .map(|(order, n)| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.order == order && r.n == n)
                .map(|r| (r.x, r.value))
                .collect();
            Ok(SeriesFit {
                order,
                n,
                report: fit_with_refit(&points)?,
            })
        })
        .collect()
}

/// Slope fit of one `(order, N)` series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFit {
    pub order: usize,
    pub n: usize,
    pub report: FitReport,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_keep_input_order() {
        let cells: Vec<usize> = (0..40).collect();
        let square = |c: usize| -> Result<usize> { Ok(c * c) };
        let serial = run_cells(&RunOptions::default(), cells.clone(), square).unwrap();
        let pooled = run_cells(
            &RunOptions {
                workers: 4,
                record_timings: false,
            },
            cells,
            square,
        )
        .unwrap();
        assert_eq!(serial, pooled);
        assert_eq!(serial[7], 49);
    }

    #[test]
    fn zero_workers_rejected() {
        let opts = RunOptions {
            workers: 0,
            record_timings: false,
        };
        assert!(run_cells(&opts, vec![1], |c: i32| Ok(c)).is_err());
    }

    #[test]
    fn untimed_cells_report_zero() {
        let (v, s) = timed(&RunOptions::default(), || Ok(3)).unwrap();
        assert_eq!((v, s), (3, 0.0));
    }
}
