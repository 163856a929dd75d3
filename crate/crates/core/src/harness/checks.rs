//! Acceptance thresholds applied to experiment rows.

use std::fmt;

use super::{Experiment, ResultRow, SeriesFit};

/// Numeric limits used by the checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub unitarity: f64,
    pub degenerate_commutator: f64,
    pub degenerate_error: f64,
    /// Allowed `(max − min)/min` across grid sizes at one `h`.
    pub n_uniformity: f64,
    /// Growth allowed between the two largest `h` values.
    pub monotone_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            unitarity: 1e-9,
            degenerate_commutator: 1e-12,
            degenerate_error: 1e-11,
            n_uniformity: 0.10,
            monotone_slack: 0.05,
        }
    }
}

/// Accepted slope range for a series.
pub fn slope_window(experiment: Experiment, order: usize) -> (f64, f64) {
    match (experiment, order) {
        (Experiment::CommScaling, 3) => (2.6, 3.4),
        (Experiment::CommScaling, 4) => (3.5, 4.5),
        (Experiment::CommScaling, q) => (q as f64 - 0.4, q as f64 + 0.4),
        (Experiment::MagnusLocal, 1) => (2.7, 3.3),
        (Experiment::MagnusLocal, 2) => (4.6, 5.4),
        (Experiment::MagnusLocal, p) => (2.0 * p as f64 + 0.5, 2.0 * p as f64 + 1.5),
        (Experiment::MagnusGlobal, 1) => (1.7, 2.3),
        (Experiment::MagnusGlobal, p) => (2.0 * p as f64 - 0.5, 2.0 * p as f64 + 0.5),
    }
}

/// One named pass/fail check with the measured quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("<= {limit:.1e}"),
            passed: measured <= limit,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, (lo, hi): (f64, f64)) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&measured),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.6e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

/// Checks for a finished experiment. `degenerate` marks potentials whose
/// commutators and Magnus errors vanish exactly; those get absolute bounds in
/// place of slope windows.
pub fn check_rows(
    experiment: Experiment,
    rows: &[ResultRow],
    fits: &[SeriesFit],
    degenerate: bool,
    limits: &Thresholds,
) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let label = experiment.id();
    if degenerate {
        let bound = match experiment {
            Experiment::CommScaling => limits.degenerate_commutator,
            _ => limits.degenerate_error,
        };
        let worst = rows.iter().map(|r| r.value).fold(0.0, f64::max);
        out.push(CheckOutcome::at_most(format!("{label} degenerate maximum"), worst, bound));
    } else {
        for fit in fits {
            let key = match experiment {
                Experiment::CommScaling => format!("layers={}", fit.order),
                _ => format!("p={}", fit.order),
            };
            out.push(CheckOutcome::within(
                format!("{label} slope {key} N={}", fit.n),
                fit.report.selected().slope,
                slope_window(experiment, fit.order),
            ));
        }
        if experiment == Experiment::CommScaling {
            out.extend(uniformity(rows, limits));
            out.extend(monotonicity(rows, limits));
        }
    }
    let defects: Vec<f64> = rows.iter().filter_map(|r| r.unitarity_defect).collect();
    if !defects.is_empty() {
        let worst = defects.iter().copied().fold(0.0, f64::max);
        out.push(CheckOutcome::at_most(format!("{label} unitarity"), worst, limits.unitarity));
    }
    out
}

/// Relative spread across grid sizes at every `h`, one outcome per layer count.
fn uniformity(rows: &[ResultRow], limits: &Thresholds) -> Vec<CheckOutcome> {
    let mut layers: Vec<usize> = rows.iter().map(|r| r.order).collect();
    layers.dedup();
    let mut out = Vec::new();
    for q in layers {
        let series: Vec<&ResultRow> = rows.iter().filter(|r| r.order == q).collect();
        let mut grids: Vec<usize> = series.iter().map(|r| r.n).collect();
        grids.sort_unstable();
        grids.dedup();
        if grids.len() < 2 {
            continue;
        }
        let mut worst = 0.0f64;
        let mut hs: Vec<f64> = series.iter().map(|r| r.x).collect();
        hs.dedup();
        for h in hs {
            let values: Vec<f64> = series.iter().filter(|r| r.x == h).map(|r| r.value).collect();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(0.0, f64::max);
            let spread = if lo > 0.0 { (hi - lo) / lo } else { f64::INFINITY };
            worst = worst.max(spread);
        }
        out.push(CheckOutcome::at_most(
            format!("commscaling N-uniformity layers={q}"),
            worst,
            limits.n_uniformity,
        ));
    }
    out
}

/// Largest ratio `value(h_next)/value(h)` along decreasing `h`, per series.
fn monotonicity(rows: &[ResultRow], limits: &Thresholds) -> Vec<CheckOutcome> {
    let mut keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.order, r.n)).collect();
    keys.dedup();
    keys.into_iter()
        .map(|(q, n)| {
            let mut series: Vec<&ResultRow> = rows.iter().filter(|r| r.order == q && r.n == n).collect();
            series.sort_by(|a, b| b.x.total_cmp(&a.x));
            let mut passed = true;
            let mut worst = 0.0f64;
            for (i, w) in series.windows(2).enumerate() {
                let allowed = if i == 0 { 1.0 + limits.monotone_slack } else { 1.0 };
                let ratio = w[1].value / w[0].value;
                worst = worst.max(ratio);
                passed &= w[1].value <= w[0].value * allowed;
            }
            CheckOutcome {
                name: format!("commscaling monotone layers={q} N={n}"),
                measured: worst,
                threshold: format!("non-increasing ({:.0}% slack at largest h)", limits.monotone_slack * 100.0),
                passed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fit_series;

    fn row(order: usize, n: usize, x: f64, value: f64) -> ResultRow {
        ResultRow {
            experiment: Experiment::CommScaling,
            order,
            n,
            x,
            value,
            seconds: 0.0,
            unitarity_defect: None,
        }
    }

    #[test]
    fn windows_match_acceptance_table() {
        assert_eq!(slope_window(Experiment::CommScaling, 3), (2.6, 3.4));
        assert_eq!(slope_window(Experiment::CommScaling, 4), (3.5, 4.5));
        assert_eq!(slope_window(Experiment::MagnusLocal, 1), (2.7, 3.3));
        assert_eq!(slope_window(Experiment::MagnusLocal, 2), (4.6, 5.4));
        assert_eq!(slope_window(Experiment::MagnusGlobal, 1), (1.7, 2.3));
        assert_eq!(slope_window(Experiment::MagnusGlobal, 2), (3.5, 4.5));
    }

    #[test]
    fn ideal_cubic_data_passes() {
        let mut rows = Vec::new();
        for n in [64, 128] {
            for k in 0..6 {
                let h = 0.5f64.powi(k);
                rows.push(row(3, n, h, 0.4 * h.powi(3) * if n == 64 { 1.0 } else { 1.05 }));
            }
        }
        let fits = fit_series(&rows).unwrap();
        let outcomes = check_rows(Experiment::CommScaling, &rows, &fits, false, &Thresholds::default());
        assert_eq!(outcomes.len(), 2 + 1 + 2);
        assert!(outcomes.iter().all(|o| o.passed), "{outcomes:?}");
    }

    #[test]
    fn spread_and_growth_fail() {
        let rows = vec![
            row(3, 64, 1.0, 1.0),
            row(3, 64, 0.5, 1.2),
            row(3, 128, 1.0, 2.0),
            row(3, 128, 0.5, 0.1),
        ];
        let fits = fit_series(&rows).unwrap();
        let outcomes = check_rows(Experiment::CommScaling, &rows, &fits, false, &Thresholds::default());
        let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
        assert!(failed.contains(&"commscaling N-uniformity layers=3"));
        assert!(failed.contains(&"commscaling monotone layers=3 N=64"));
    }

    #[test]
    fn degenerate_rows_use_absolute_bound() {
        let mut rows = vec![row(3, 16, 1.0, 0.0), row(3, 16, 0.5, 1e-13)];
        let outcomes = check_rows(Experiment::CommScaling, &rows, &[], true, &Thresholds::default());
        assert_eq!(outcomes.len(), 1);
        assert!(outcomes[0].passed);
        rows[1].value = 1e-10;
        assert!(!check_rows(Experiment::CommScaling, &rows, &[], true, &Thresholds::default())[0].passed);
    }

    #[test]
    fn display_line() {
        let o = CheckOutcome::at_most("x", 0.5, 1.0);
        assert_eq!(o.to_string(), "PASS x: 5.000000e-1 (<= 1.0e0)");
    }
}
