//! Command-line orchestration for `quadrant-escape`.

pub mod checks;
pub mod format;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadrant_escape::bvp::PsiEvaluator;
use quadrant_escape::inversion::{self, Axis, InversionConfig, Inverter};
use quadrant_escape::oracles::{mc_escape_prob, pde_solve, McConfig, PdeConfig};
use quadrant_escape::{kernel, model, BvpError, Complex64, InversionError, ModelParams, OracleError};
use serde::{Deserialize, Serialize};

use format::{to_csv, to_json, Cx};

#[derive(Debug, Parser)]
#[command(name = "qescape", version, about = "Escape and absorption probabilities of reflected Brownian motion in the quadrant")]
pub struct Cli {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

/// Model parameters: a JSON file, individual flags, or both (flags win).
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON object with fields mu1, mu2, rho, r1, r2.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    H,
    V,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angles, special points, index and regimes.
    Analyze,
    /// psi1, psi2 and psi at complex points, written `re[:im]`.
    Evaluate {
        /// `x` or `x,y`, e.g. `1.5:0.2,0.8`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Absorption and escape probability from one start point.
    Invert {
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        v: f64,
        /// Use the boundary value problem even in the product-form case.
        #[arg(long)]
        bvp: bool,
    },
    /// Probabilities on a uniform grid along one axis.
    Sweep {
        #[arg(long, value_enum, default_value = "h")]
        axis: AxisArg,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        bvp: bool,
    },
    /// Monte Carlo estimate of the escape probability.
    Simulate {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: u64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Finite-difference absorption probability on `[0, L]^2`.
    Pde {
        /// Side of the box; defaults to 10 max(1/mu1, 1/mu2).
        #[arg(long = "L")]
        l: Option<f64>,
        /// Mesh width; defaults to L/200.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Runs the invariant battery and prints a pass/fail table.
    Crosscheck,
}

/// Outcome of a command: text to emit and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad input; exit code 2.
    Validation(String),
    /// The numerics failed; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Validation(m) | Self::Numerical(m) => m,
        }
    }
}

fn describe<E: std::fmt::Display + std::fmt::Debug>(e: &E) -> String {
    format!("{e} [{e:?}]")
}

impl From<quadrant_escape::ModelError> for CliError {
    fn from(e: quadrant_escape::ModelError) -> Self {
        Self::Validation(describe(&e))
    }
}

impl From<BvpError> for CliError {
    fn from(e: BvpError) -> Self {
        Self::Numerical(describe(&e))
    }
}

impl From<InversionError> for CliError {
    fn from(e: InversionError) -> Self {
        match e {
            InversionError::InvalidInput(_) => Self::Validation(describe(&e)),
            _ => Self::Numerical(describe(&e)),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InvalidConfig(_) => Self::Validation(describe(&e)),
            _ => Self::Numerical(describe(&e)),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
struct RawParams {
    mu1: Option<f64>,
    mu2: Option<f64>,
    rho: Option<f64>,
    r1: Option<f64>,
    r2: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<RawParams>(&text)
                    .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))?
            }
            None => RawParams::default(),
        };
        let pick = |flag: Option<f64>, file: Option<f64>, name: &str| {
            flag.or(file).ok_or_else(|| CliError::Validation(format!("missing parameter {name}")))
        };
        Ok(model::validate_params(
            pick(self.mu1, file.mu1, "mu1")?,
            pick(self.mu2, file.mu2, "mu2")?,
            pick(self.rho, file.rho, "rho")?,
            pick(self.r1, file.r1, "r1")?,
            pick(self.r2, file.r2, "r2")?,
        )?)
    }
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Validation(format!("cannot parse complex number {s:?}, expected re[:im]"));
    let mut parts = s.trim().splitn(2, ':');
    let re = parts.next().ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?;
    let im = match parts.next() {
        Some(t) => t.trim().parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

#[derive(Serialize)]
struct AnalyzeReport {
    params: ModelParams,
    geometry: model::WedgeGeometry,
    kernel: kernel::KernelData,
    classification: model::Classification,
    table_cell: String,
    asymptotics_horizontal: inversion::AsymptoticReport,
    asymptotics_vertical: inversion::AsymptoticReport,
}

#[derive(Serialize)]
struct EvaluateReport {
    x: Cx,
    psi1: Cx,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi2: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi: Option<Cx>,
}

#[derive(Serialize)]
struct InvertReport {
    u: f64,
    v: f64,
    p_absorb: f64,
    p_escape: f64,
    spread: f64,
    inverted_escape: bool,
    clamped: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    config: McConfig,
    u: f64,
    v: f64,
    #[serde(flatten)]
    estimate: quadrant_escape::oracles::McEstimate,
}

fn inverter(p: &ModelParams, bvp: bool) -> Result<Inverter, CliError> {
    let cfg = InversionConfig::default();
    Ok(if bvp { Inverter::with_bvp(p, cfg)? } else { Inverter::new(p, cfg)? })
}

fn probability(inv: &Inverter, u: f64, v: f64) -> Result<inversion::Probability, CliError> {
    if !(u >= 0.0 && v >= 0.0) || (u == 0.0 && v == 0.0) {
        return Err(CliError::Validation(format!("start point ({u}, {v}) must be in the closed quadrant minus the corner")));
    }
    Ok(if v == 0.0 {
        inv.absorption_prob_axis(u, Axis::Horizontal)?
    } else if u == 0.0 {
        inv.absorption_prob_axis(v, Axis::Vertical)?
    } else {
        inv.escape_prob_interior(u, v)?
    })
}

fn checks_table(results: &[checks::CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{:width$}  {status}  {:>7.2}s  {}\n", r.name, r.seconds, r.detail));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    s.push_str(&format!("{} checks, {failed} failed\n", results.len()));
    s
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let ok = |text: String| Ok(Output { text, code: 0 });
    let csv_out = |default_csv: bool| cli.format.map_or(default_csv, |f| f == Format::Csv);
    match &cli.command {
        Command::Analyze => {
            let p = cli.params.resolve()?;
            let geometry = model::wedge_geometry(&p);
            let classification = model::classify(&p, &geometry);
            let report = AnalyzeReport {
                params: p,
                geometry,
                kernel: kernel::special_points(&p),
                table_cell: classification.table_cell(),
                classification,
                asymptotics_horizontal: inversion::asymptotics(&p, Axis::Horizontal),
                asymptotics_vertical: inversion::asymptotics(&p, Axis::Vertical),
            };
            ok(to_json(&report))
        }
        Command::Evaluate { at } => {
            let p = cli.params.resolve()?;
            let mut parts = at.splitn(2, ',');
            let x = parse_complex(parts.next().unwrap_or(""))?;
            let y = parts.next().map(parse_complex).transpose()?;
            let ev = PsiEvaluator::new(&p)?;
            let psi1 = ev.psi1(x)?;
            let report = match y {
                Some(y) => {
                    let psi2 = ev.psi2(y)?;
                    let psi = quadrant_escape::bvp::psi_from_parts(&p, x, y, psi1, psi2)?;
                    EvaluateReport { x: x.into(), psi1: psi1.into(), y: Some(y.into()), psi2: Some(psi2.into()), psi: Some(psi.into()) }
                }
                None => EvaluateReport { x: x.into(), psi1: psi1.into(), y: None, psi2: None, psi: None },
            };
            ok(to_json(&report))
        }
        Command::Invert { u, v, bvp } => {
            let p = cli.params.resolve()?;
            let pr = probability(&inverter(&p, *bvp)?, *u, *v)?;
            let report = InvertReport {
                u: *u,
                v: *v,
                p_absorb: pr.p_absorb,
                p_escape: pr.p_escape,
                spread: pr.spread,
                inverted_escape: pr.inverted_escape,
                clamped: pr.clamped,
            };
            if csv_out(false) {
                ok(to_csv(&["u", "v", "p_absorb", "p_escape"], &[vec![*u, *v, pr.p_absorb, pr.p_escape]]))
            } else {
                ok(to_json(&report))
            }
        }
        Command::Sweep { axis, from, to, points, bvp } => {
            let p = cli.params.resolve()?;
            if *points < 2 || !(from.is_finite() && to.is_finite()) || *from <= 0.0 || to <= from {
                return Err(CliError::Validation(format!(
                    "sweep needs 0 < from < to and at least 2 points, got from={from} to={to} points={points}"
                )));
            }
            let inv = inverter(&p, *bvp)?;
            let ax = match axis {
                AxisArg::H => Axis::Horizontal,
                AxisArg::V => Axis::Vertical,
            };
            let mut rows = Vec::with_capacity(*points);
            for k in 0..*points {
                let t = k as f64 / (*points - 1) as f64;
                let s = from * (1.0 - t) + to * t;
                let pr = inv.absorption_prob_axis(s, ax)?;
                rows.push(vec![s, pr.p_absorb, pr.p_escape]);
            }
            let name = if *axis == AxisArg::H { "u" } else { "v" };
            if csv_out(true) {
                ok(to_csv(&[name, "p_absorb", "p_escape"], &rows))
            } else {
                let objs: Vec<_> = rows.iter().map(|r| serde_json::json!({ name: r[0], "p_absorb": r[1], "p_escape": r[2] })).collect();
                ok(to_json(&objs))
            }
        }
        Command::Simulate { u, v, paths, dt, seed } => {
            let p = cli.params.resolve()?;
            let config = McConfig { dt: *dt, n_paths: *paths, seed: *seed, ..McConfig::for_params(&p) };
            let estimate = mc_escape_prob((*u, *v), &p, &config)?;
            ok(to_json(&SimulateReport { config, u: *u, v: *v, estimate }))
        }
        Command::Pde { l, h } => {
            let p = cli.params.resolve()?;
            let mut cfg = PdeConfig::for_params(&p, 200);
            if let Some(l) = l {
                cfg.l = *l;
                cfg.h = l / 200.0;
            }
            if let Some(h) = h {
                cfg.h = *h;
            }
            if !(cfg.l > 0.0 && cfg.h > 0.0 && cfg.h < cfg.l) {
                return Err(CliError::Validation(format!("need 0 < h < L, got L={} h={}", cfg.l, cfg.h)));
            }
            let grid = pde_solve(&p, &cfg)?;
            if csv_out(true) {
                let mut rows = Vec::with_capacity((grid.n + 1) * (grid.n + 1));
                for j in 0..=grid.n {
                    for i in 0..=grid.n {
                        rows.push(vec![i as f64 * grid.h, j as f64 * grid.h, grid.at(i, j)]);
                    }
                }
                ok(to_csv(&["u", "v", "f"], &rows))
            } else {
                ok(to_json(&grid))
            }
        }
        Command::Crosscheck => {
            let results = checks::run_all();
            let failed = results.iter().any(|r| !r.passed);
            let text = if cli.format == Some(Format::Json) { to_json(&results) } else { checks_table(&results) };
            Ok(Output { text, code: if failed { 1 } else { 0 } })
        }
    }
}

/// Parses `argv`, runs the command and writes the result; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &out.text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{}", out.text),
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("1.5:-0.25").unwrap(), Complex64::new(1.5, -0.25));
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_complex("1+2i").is_err());
    }

    #[test]
    fn flags_override_config_and_missing_is_reported() {
        let args = ParamArgs { mu1: Some(1.0), ..Default::default() };
        assert!(matches!(args.resolve(), Err(CliError::Validation(m)) if m.contains("mu2")));
    }
}
