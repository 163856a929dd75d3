//! Command-line front end.
//!
//! Flags are `--key value` (or `--key=value`). `--config <file>` reads
//! `key = value` lines first; flags on the command line win. Every key has a
//! default, so each subcommand run bare reproduces the reference setup.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::discretize::{Frame, PotentialSpec};
use crate::error::Error;
use crate::harness::checks::{check_rows, Thresholds};
use crate::harness::comm_scaling::{Bracketing, CommScalingConfig};
use crate::harness::{
    emit_results, fit_series, run_comm_scaling, run_global_error, run_local_error,
    run_verification_suite, CheckOutcome, Experiment, GlobalErrorConfig, LocalErrorConfig,
    ResultRow, RunOptions, SeriesFit,
};
use crate::magnus::SimplexScheme;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Environment fallback for `--out-dir`.
pub const OUT_DIR_ENV: &str = "MAGNUS_OUT";

/// Sustained rate assumed when printing `--full` cost estimates.
const ASSUMED_FLOPS_PER_SECOND: f64 = 5e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    CommScaling,
    MagnusLocal,
    MagnusGlobal,
    Verify,
}

impl Subcommand {
    pub const ALL: [Subcommand; 4] = [
        Subcommand::CommScaling,
        Subcommand::MagnusLocal,
        Subcommand::MagnusGlobal,
        Subcommand::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CommScaling => "comm-scaling",
            Subcommand::MagnusLocal => "magnus-local",
            Subcommand::MagnusGlobal => "magnus-global",
            Subcommand::Verify => "verify",
        }
    }

    fn summary(self) -> &'static str {
        match self {
            Subcommand::CommScaling => "max spectral norm of nested commutators of H_I against h",
            Subcommand::MagnusLocal => "single-step Magnus error against the exact propagator",
            Subcommand::MagnusGlobal => "global Magnus error over [0, T] against the step count",
            Subcommand::Verify => "pull-out identity, Magnus term cross-checks and other self-checks",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == text)
    }

    pub fn keys(self) -> Vec<KeySpec> {
        let mut keys = vec![
            KeySpec::new("out-dir", "magnus-out", "output directory (falls back to $MAGNUS_OUT)"),
            KeySpec::new("workers", "1", "worker threads for independent cells"),
            KeySpec::new("seed", "7", "random seed"),
            KeySpec::new("timings", "false", "write wall times into the seconds column"),
        ];
        match self {
            Subcommand::CommScaling => keys.extend([
                KeySpec::new("layers", "3", "commutator layers q (grade q+1), 2..=4"),
                KeySpec::new("grids", "64,128", "grid sizes N"),
                KeySpec::new("h", "1,0.5,0.25,0.125,0.0625,0.03125", "h values"),
                KeySpec::new("labels", "7", "time labels per h: h, h/2, ..."),
                KeySpec::new("potential", "cos", "cos | halfcos | zero | constant:<c>"),
                KeySpec::new("bracketing", "left-normed", "left-normed | all-trees"),
                KeySpec::new("frame", "eigen", "eigen | position"),
                KeySpec::new("tree-budget", "50000", "max trees per cell for all-trees"),
                KeySpec::new("full", "false", "use grids 256,512,1024,2048 unless --grids is given"),
            ]),
            Subcommand::MagnusLocal => keys.extend([
                KeySpec::new("orders", "1,2", "Magnus orders p"),
                KeySpec::new("n", "128", "grid size N"),
                KeySpec::new("dt", "0.8,0.4,0.2,0.1", "step sizes, strictly decreasing"),
                KeySpec::new("quad", "512,256", "Gauss-Legendre nodes per level for Omega_1, Omega_2, ..."),
                KeySpec::new("potential", "halfcos", "cos | halfcos | zero | constant:<c>"),
                KeySpec::new("t0", "0", "start time of the step"),
                KeySpec::new("scheme", "nested", "nested | triangular"),
                KeySpec::new("frame", "eigen", "eigen | position"),
                KeySpec::new("work-budget", "5e11", "max estimated multiply-adds per Omega_n"),
            ]),
            Subcommand::MagnusGlobal => keys.extend([
                KeySpec::new("orders", "1,2", "Magnus orders p"),
                KeySpec::new("t-final", "1", "final time T"),
                KeySpec::new("steps", "4,8,16,32", "step counts L"),
                KeySpec::new("n", "64", "grid size N"),
                KeySpec::new("quad", "512,256", "Gauss-Legendre nodes per level for Omega_1, Omega_2, ..."),
                KeySpec::new("potential", "halfcos", "cos | halfcos | zero | constant:<c>"),
                KeySpec::new("scheme", "nested", "nested | triangular"),
                KeySpec::new("frame", "eigen", "eigen | position"),
                KeySpec::new("work-budget", "5e11", "max estimated multiply-adds per Omega_n"),
            ]),
            Subcommand::Verify => {}
        }
        keys
    }

    pub fn help(self) -> String {
        let mut s = format!(
            "ipmagnus {} - {}\n\nusage: ipmagnus {} [--config FILE] [--key value]...\n\nkeys (default):\n",
            self.name(),
            self.summary(),
            self.name()
        );
        let keys = self.keys();
        let width = keys.iter().map(|k| k.name.len()).max().unwrap_or(0);
        for k in keys {
            s.push_str(&format!(
                "  --{:<width$}  {} (default: {})\n",
                k.name, k.help, k.default
            ));
        }
        s
    }
}

pub fn top_level_help() -> String {
    let mut s = String::from(
        "ipmagnus - Magnus integrators in the interaction picture\n\nusage: ipmagnus <subcommand> [--key value]...\n\nsubcommands:\n",
    );
    for sub in Subcommand::ALL {
        s.push_str(&format!("  {:<14} {}\n", sub.name(), sub.summary()));
    }
    s.push_str("\nRun `ipmagnus <subcommand> --help` for the accepted keys.\n");
    s
}

/// One accepted key with its default value.
#[derive(Clone, Debug, PartialEq)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

impl KeySpec {
    fn new(name: &'static str, default: &'static str, help: &'static str) -> Self {
        Self { name, default, help }
    }
}

/// Errors from argument parsing and value conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

/// Result of parsing argv.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Help(String),
    Run(CliConfig),
}

/// Resolved settings for one subcommand: every key of the subcommand mapped
/// to its final textual value.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub subcommand: Subcommand,
    values: BTreeMap<String, String>,
    explicit: Vec<String>,
}

impl CliConfig {
    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key '{key}' is not defined for {}", self.subcommand.name()))
    }

    /// Whether `key` came from a flag or config file rather than the default.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out-dir"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        parse_value("seed", self.get("seed"))
    }

    pub fn full(&self) -> Result<bool, CliError> {
        if self.subcommand == Subcommand::CommScaling {
            parse_bool("full", self.get("full"))
        } else {
            Ok(false)
        }
    }

    pub fn run_options(&self) -> Result<RunOptions, CliError> {
        let workers: usize = parse_value("workers", self.get("workers"))?;
        if workers < 1 {
            return Err(CliError("--workers must be at least 1".into()));
        }
        Ok(RunOptions {
            workers,
            record_timings: parse_bool("timings", self.get("timings"))?,
        })
    }

    pub fn comm_scaling(&self) -> Result<CommScalingConfig, CliError> {
        let layers: usize = parse_value("layers", self.get("layers"))?;
        let grid_sizes = if self.full()? && !self.is_explicit("grids") {
            CommScalingConfig::full_grid_sizes()
        } else {
            parse_list("grids", self.get("grids"))?
        };
        let cfg = CommScalingConfig {
            layers,
            grid_sizes,
            h_values: parse_list("h", self.get("h"))?,
            labels_per_h: parse_value("labels", self.get("labels"))?,
            potential: parse_potential(self.get("potential"))?,
            bracketing: Bracketing::parse(self.get("bracketing")).map_err(|e| CliError(e.to_string()))?,
            frame: parse_frame(self.get("frame"))?,
            tree_budget: parse_value("tree-budget", self.get("tree-budget"))?,
        };
        match cfg.validate() {
            Err(Error::WorkBudget { .. }) | Ok(()) => Ok(cfg),
            Err(e) => Err(CliError(e.to_string())),
        }
    }

    pub fn local_error(&self) -> Result<LocalErrorConfig, CliError> {
        let cfg = LocalErrorConfig {
            orders: parse_list("orders", self.get("orders"))?,
            n: parse_value("n", self.get("n"))?,
            dt_values: parse_list("dt", self.get("dt"))?,
            quad_orders: parse_list("quad", self.get("quad"))?,
            potential: parse_potential(self.get("potential"))?,
            t0: parse_value("t0", self.get("t0"))?,
            scheme: parse_scheme(self.get("scheme"))?,
            frame: parse_frame(self.get("frame"))?,
            work_budget: parse_value("work-budget", self.get("work-budget"))?,
        };
        cfg.validate().map_err(|e| CliError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn global_error(&self) -> Result<GlobalErrorConfig, CliError> {
        let cfg = GlobalErrorConfig {
            orders: parse_list("orders", self.get("orders"))?,
            t_final: parse_value("t-final", self.get("t-final"))?,
            steps: parse_list("steps", self.get("steps"))?,
            n: parse_value("n", self.get("n"))?,
            quad_orders: parse_list("quad", self.get("quad"))?,
            potential: parse_potential(self.get("potential"))?,
            scheme: parse_scheme(self.get("scheme"))?,
            frame: parse_frame(self.get("frame"))?,
            work_budget: parse_value("work-budget", self.get("work-budget"))?,
        };
        cfg.validate().map_err(|e| CliError(e.to_string()))?;
        Ok(cfg)
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, text: &str) -> Result<T, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError(format!("cannot parse value '{text}' for --{key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',').map(|item| parse_value(key, item)).collect()
}

fn parse_bool(key: &str, text: &str) -> Result<bool, CliError> {
    match text.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(CliError(format!("cannot parse value '{other}' for --{key} (expected true or false)"))),
    }
}

fn parse_potential(text: &str) -> Result<PotentialSpec, CliError> {
    PotentialSpec::parse(text).map_err(|e| CliError(format!("--potential: {e}")))
}

fn parse_frame(text: &str) -> Result<Frame, CliError> {
    match text {
        "eigen" => Ok(Frame::Eigen),
        "position" => Ok(Frame::Position),
        other => Err(CliError(format!("cannot parse value '{other}' for --frame (expected eigen or position)"))),
    }
}

fn parse_scheme(text: &str) -> Result<SimplexScheme, CliError> {
    match text {
        "nested" => Ok(SimplexScheme::NestedGaussLegendre),
        "triangular" => Ok(SimplexScheme::TriangularFilter),
        other => Err(CliError(format!(
            "cannot parse value '{other}' for --scheme (expected nested or triangular)"
        ))),
    }
}

const BOOLEAN_KEYS: [&str; 2] = ["full", "timings"];

/// Parse argv (without the program name). `env_out_dir` is the value of
/// `$MAGNUS_OUT`, if set.
pub fn parse_args(args: &[String], env_out_dir: Option<&str>) -> Result<Invocation, CliError> {
    let Some(first) = args.first() else {
        return Ok(Invocation::Help(top_level_help()));
    };
    if first == "--help" || first == "-h" || first == "help" {
        return Ok(Invocation::Help(top_level_help()));
    }
    let subcommand =
        Subcommand::parse(first).ok_or_else(|| CliError(format!("unknown subcommand '{first}'")))?;
    let specs = subcommand.keys();
    let known = |key: &str| specs.iter().any(|k| k.name == key);

    let mut flags: Vec<(String, String)> = Vec::new();
    let mut config_file: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        let token = &args[i];
        if token == "--help" || token == "-h" {
            return Ok(Invocation::Help(subcommand.help()));
        }
        let Some(body) = token.strip_prefix("--") else {
            return Err(CliError(format!("unexpected argument '{token}'")));
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if key != "config" && !known(&key) {
            return Err(CliError(format!("unknown key '--{key}' for {}", subcommand.name())));
        }
        let value = match inline {
            Some(v) => v,
            None => match args.get(i + 1) {
                Some(next) if !next.starts_with("--") => {
                    i += 1;
                    next.clone()
                }
                _ if BOOLEAN_KEYS.contains(&key.as_str()) => "true".to_string(),
                _ => return Err(CliError(format!("missing value for '--{key}'"))),
            },
        };
        if key == "config" {
            config_file = Some(value);
        } else {
            flags.push((key, value));
        }
        i += 1;
    }

    let mut values: BTreeMap<String, String> =
        specs.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
    let mut explicit = Vec::new();
    let mut out_dir_given = false;
    if let Some(path) = config_file {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError(format!("cannot read config file '{path}': {e}")))?;
        for (key, value) in parse_config_text(&text)? {
            if !known(&key) {
                return Err(CliError(format!(
                    "unknown key '{key}' in config file '{path}' for {}",
                    subcommand.name()
                )));
            }
            out_dir_given |= key == "out-dir";
            explicit.push(key.clone());
            values.insert(key, value);
        }
    }
    for (key, value) in flags {
        out_dir_given |= key == "out-dir";
        explicit.push(key.clone());
        values.insert(key, value);
    }
    if !out_dir_given {
        if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
            values.insert("out-dir".into(), dir.to_string());
        }
    }
    let cfg = CliConfig {
        subcommand,
        values,
        explicit,
    };
    // Surface malformed values now rather than after a long run.
    cfg.run_options()?;
    cfg.seed()?;
    match subcommand {
        Subcommand::CommScaling => {
            cfg.comm_scaling()?;
        }
        Subcommand::MagnusLocal => {
            cfg.local_error()?;
        }
        Subcommand::MagnusGlobal => {
            cfg.global_error()?;
        }
        Subcommand::Verify => {}
    }
    Ok(Invocation::Run(cfg))
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError(format!("config line {}: expected 'key = value', got '{raw}'", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(CliError(format!("config line {}: empty key", lineno + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parse, run and report; returns the process exit code.
pub fn run(args: &[String], env_out_dir: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match parse_args(args, env_out_dir) {
        Ok(Invocation::Help(text)) => {
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
        Ok(Invocation::Run(cfg)) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::WorkBudget { .. } => EXIT_BUDGET,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn config_error(e: CliError) -> Error {
    Error::InvalidInput(e.0)
}

/// Run the subcommand described by `cfg`, writing files under its output
/// directory and a summary to `out`.
pub fn execute(cfg: &CliConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let opts = cfg.run_options().map_err(config_error)?;
    let dir = cfg.out_dir();
    let limits = Thresholds::default();
    let (experiment, rows, degenerate) = match cfg.subcommand {
        Subcommand::Verify => {
            let report = run_verification_suite(cfg.seed().map_err(config_error)?)?;
            fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
            let path = dir.join("verify_report.txt");
            fs::write(&path, report.render()).map_err(|e| io_error(&path, e))?;
            let _ = write!(out, "{}", report.render());
            let _ = writeln!(out, "report: {}", path.display());
            return Ok(if report.passed() { EXIT_OK } else { EXIT_ACCEPTANCE });
        }
        Subcommand::CommScaling => {
            let sweep = cfg.comm_scaling().map_err(config_error)?;
            if cfg.full().map_err(config_error)? {
                let flops = sweep.estimated_flops();
                let _ = writeln!(
                    out,
                    "estimated cost: {:.2e} flop, about {:.0} s at {:.0e} flop/s",
                    flops,
                    flops / ASSUMED_FLOPS_PER_SECOND,
                    ASSUMED_FLOPS_PER_SECOND
                );
            }
            let degenerate = sweep.potential.is_trivial();
            (Experiment::CommScaling, run_comm_scaling(&sweep, &opts)?, degenerate)
        }
        Subcommand::MagnusLocal => {
            let sweep = cfg.local_error().map_err(config_error)?;
            let degenerate = sweep.potential.is_trivial();
            (Experiment::MagnusLocal, run_local_error(&sweep, &opts)?, degenerate)
        }
        Subcommand::MagnusGlobal => {
            let sweep = cfg.global_error().map_err(config_error)?;
            let degenerate = sweep.potential.is_trivial();
            (Experiment::MagnusGlobal, run_global_error(&sweep, &opts)?, degenerate)
        }
    };
    let fits = if degenerate { Vec::new() } else { fit_series(&rows)? };
    let files = emit_results(experiment, &rows, &fits, &dir)?;
    let checks = check_rows(experiment, &rows, &fits, degenerate, &limits);
    let _ = write!(out, "{}", render_summary(experiment, &rows, &fits, &checks));
    let _ = writeln!(out, "csv: {}", files.csv.display());
    if let Some(svg) = files.svg {
        let _ = writeln!(out, "svg: {}", svg.display());
    }
    Ok(if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_ACCEPTANCE
    })
}

fn io_error(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Data table, slope table and check lines.
pub fn render_summary(
    experiment: Experiment,
    rows: &[ResultRow],
    fits: &[SeriesFit],
    checks: &[CheckOutcome],
) -> String {
    let (order_name, x_name) = match experiment {
        Experiment::CommScaling => ("layers", "h"),
        Experiment::MagnusLocal => ("p", "dt"),
        Experiment::MagnusGlobal => ("p", "h"),
    };
    let mut s = format!("{:<7} {:>5} {:>10} {:>14}\n", order_name, "N", x_name, "value");
    for r in rows {
        s.push_str(&format!("{:<7} {:>5} {:>10.6} {:>14.6e}\n", r.order, r.n, r.x, r.value));
    }
    if !fits.is_empty() {
        s.push_str(&format!(
            "\n{:<7} {:>5} {:>8} {:>8} {:>6} {:>12} {:>10}\n",
            order_name, "N", "slope", "r2", "points", "refit slope", "refit r2"
        ));
        for f in fits {
            let full = &f.report.full;
            let (rs, rr) = match &f.report.refit {
                Some(r) => (format!("{:.3}", r.slope), format!("{:.4}", r.r_squared)),
                None => ("-".into(), "-".into()),
            };
            s.push_str(&format!(
                "{:<7} {:>5} {:>8.3} {:>8.4} {:>6} {:>12} {:>10}\n",
                f.order, f.n, full.slope, full.r_squared, full.points_used, rs, rr
            ));
        }
    }
    s.push('\n');
    for c in checks {
        s.push_str(&format!("{c}\n"));
    }
    s
}
