use crate::error::{Error, Result};

/// Values at or below this are treated as numerical zero and left out of fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Refit without the coarsest point when the full fit is worse than this.
pub const REFIT_R_SQUARED: f64 = 0.995;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Points dropped because `y ≤ FIT_FLOOR`.
    pub excluded: usize,
}

/// Fit `ln y = slope · ln x + intercept`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0) || !(*y >= 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput(format!("fit point ({x}, {y}) is not positive and finite")));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > FIT_FLOOR)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::NotEnoughPoints {
            usable: usable.len(),
            excluded,
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all fit abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points_used: usable.len(),
        excluded,
    })
}

/// Full fit plus, when its `r²` is below [`REFIT_R_SQUARED`], a refit with the
/// point of largest `x` removed.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub full: SlopeFit,
    pub refit: Option<SlopeFit>,
}

impl FitReport {
    /// The fit that acceptance checks read.
    pub fn selected(&self) -> &SlopeFit {
        self.refit.as_ref().unwrap_or(&self.full)
    }
}

pub fn fit_with_refit(points: &[(f64, f64)]) -> Result<FitReport> {
    let full = fit_loglog_slope(points)?;
    let mut refit = None;
    if full.r_squared < REFIT_R_SQUARED && points.len() > 2 {
        let coarsest = points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let rest: Vec<(f64, f64)> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != coarsest)
            .map(|(_, p)| *p)
            .collect();
        refit = fit_loglog_slope(&rest).ok();
    }
    Ok(FitReport { full, refit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 0.5, 0.25].iter().map(|&h: &f64| (h, h.powi(3))).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert_eq!(f.points_used, 3);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0)]),
            Err(Error::NotEnoughPoints { usable: 1, excluded: 0 })
        ));
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0), (0.5, 0.0), (0.25, 1e-16)]),
            Err(Error::NotEnoughPoints { usable: 1, excluded: 2 })
        ));
        assert!(fit_loglog_slope(&[(0.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn floor_points_are_reported() {
        let f = fit_loglog_slope(&[(1.0, 1.0), (0.5, 0.25), (0.25, 0.0)]).unwrap();
        assert_eq!((f.points_used, f.excluded), (2, 1));
        assert!((f.slope - 2.0).abs() < 1e-14);
    }

    #[test]
    fn noisy_synthetic_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let x = 0.5f64.powi(k);
                (x, 7.0 * x.powf(2.5) * (1.0 + rng.random_range(-1e-3..1e-3)))
            })
            .collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((2.49..=2.51).contains(&f.slope));
    }

    #[test]
    fn refit_drops_coarsest_point() {
        let mut pts: Vec<(f64, f64)> = (1..6).map(|k| {
            let x = 0.5f64.powi(k);
            (x, x.powi(3))
        }).collect();
        pts.insert(0, (1.0, 1e-4));
        let r = fit_with_refit(&pts).unwrap();
        assert!(r.full.r_squared < REFIT_R_SQUARED);
        let refit = r.refit.as_ref().unwrap();
        assert_eq!(refit.points_used, 5);
        assert!((r.selected().slope - 3.0).abs() < 1e-12);

        let clean = fit_with_refit(&pts[1..]).unwrap();
        assert!(clean.refit.is_none());
    }

    proptest! {
        #[test]
        fn recovers_any_slope(slope in -6.0f64..6.0, c in 0.01f64..100.0) {
            let pts: Vec<(f64, f64)> = (0..5).map(|k| {
                let x = 0.5f64.powi(k);
                (x, c * x.powf(slope))
            }).collect();
            let f = fit_loglog_slope(&pts).unwrap();
            prop_assert!((f.slope - slope).abs() < 1e-10);
            prop_assert!(f.r_squared <= 1.0 && f.r_squared >= 0.0);
        }
    }
}
