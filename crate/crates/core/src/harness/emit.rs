//! CSV and log-log SVG output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Experiment, ResultRow, SeriesFit};
use crate::error::{Error, Result};

/// Paths written by [`emit_results`].
#[derive(Clone, Debug, PartialEq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}

pub fn csv_header(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::CommScaling => "experiment,layers,N,h,max_norm,seconds",
        Experiment::MagnusLocal => "experiment,p,N,dt,error,seconds",
        Experiment::MagnusGlobal => "experiment,p,N,h,error,seconds",
    }
}

/// CSV text; floats carry 17 significant digits.
pub fn render_csv(experiment: Experiment, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(csv_header(experiment));
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e}",
            experiment.id(),
            r.order,
            r.n,
            r.x,
            r.value,
            r.seconds
        );
    }
    out
}

/// Write `<dir>/<experiment>.csv` and, when there are rows, `<dir>/<experiment>.svg`.
pub fn emit_results(
    experiment: Experiment,
    rows: &[ResultRow],
    fits: &[SeriesFit],
    dir: &Path,
) -> Result<EmittedFiles> {
    let io = |path: &Path, source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let csv = dir.join(format!("{}.csv", experiment.id()));
    fs::write(&csv, render_csv(experiment, rows)).map_err(|e| io(&csv, e))?;
    let svg = match render_svg(experiment, rows, fits) {
        Some(text) => {
            let path = dir.join(format!("{}.svg", experiment.id()));
            fs::write(&path, text).map_err(|e| io(&path, e))?;
            Some(path)
        }
        None => None,
    };
    Ok(EmittedFiles { csv, svg })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x.log10() - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y.log10() - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Log-log plot with one polyline per series and dashed reference slopes.
/// Points at or below the fit floor are not drawn. `None` without plottable rows.
pub fn render_svg(experiment: Experiment, rows: &[ResultRow], fits: &[SeriesFit]) -> Option<String> {
    let plotted: Vec<&ResultRow> = rows.iter().filter(|r| r.value > super::fit::FIT_FLOOR).collect();
    if plotted.is_empty() {
        return None;
    }
    let log_range = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min).log10();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
        if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo))
        }
    };
    let axes = Axes {
        x: log_range(plotted.iter().map(|r| r.x).collect()),
        y: log_range(plotted.iter().map(|r| r.value).collect()),
    };

    let mut keys: Vec<(usize, usize)> = Vec::new();
    for r in &plotted {
        if !keys.contains(&(r.order, r.n)) {
            keys.push((r.order, r.n));
        }
    }
    let (x_label, y_label) = match experiment {
        Experiment::CommScaling => ("h", "max spectral norm"),
        Experiment::MagnusLocal => ("dt", "local error"),
        Experiment::MagnusGlobal => ("h", "global error"),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for decade in (axes.x.0.ceil() as i32)..=(axes.x.1.floor() as i32) {
        let x = axes.px(10f64.powi(decade));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 20.0
        );
    }
    for decade in (axes.y.0.ceil() as i32)..=(axes.y.1.floor() as i32) {
        let y = axes.py(10f64.powi(decade));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"#,
            MARGIN - 5.0,
            MARGIN - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, &(order, n)) in keys.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut series: Vec<&&ResultRow> = plotted.iter().filter(|r| r.order == order && r.n == n).collect();
        series.sort_by(|a, b| a.x.total_cmp(&b.x));
        let points: Vec<String> = series
            .iter()
            .map(|r| format!("{:.2},{:.2}", axes.px(r.x), axes.py(r.value)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        for r in &series {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                axes.px(r.x),
                axes.py(r.value)
            );
        }
        let name = match experiment {
            Experiment::CommScaling => format!("layers={order} N={n}"),
            _ => format!("p={order} N={n}"),
        };
        let slope = fits
            .iter()
            .find(|f| f.order == order && f.n == n)
            .map(|f| format!(" slope {:.2}", f.report.selected().slope))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{name}{slope}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * i as f64
        );
    }

    // Reference slopes, each anchored at the coarsest point of a series.
    let anchors: Vec<&ResultRow> = keys
        .iter()
        .filter_map(|&(order, n)| {
            plotted
                .iter()
                .filter(|r| r.order == order && r.n == n)
                .max_by(|a, b| a.x.total_cmp(&b.x))
                .copied()
        })
        .collect();
    for (j, slope) in experiment.guide_slopes().into_iter().enumerate() {
        let anchor = anchors[j.min(anchors.len() - 1)];
        let x_lo = 10f64.powf(axes.x.0);
        let y_lo = anchor.value * (x_lo / anchor.x).powf(slope);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
            axes.px(anchor.x),
            axes.py(anchor.value),
            axes.px(x_lo),
            axes.py(y_lo)
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" fill="#555">slope {slope}</text>"##,
            WIDTH - MARGIN - 70.0,
            HEIGHT - MARGIN - 12.0 - 14.0 * j as f64
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}
