//! Command-line front end. Every subcommand writes CSV: `#` metadata lines,
//! a header row, then records.
//!
//! Numeric options resolve as flag, then `key = value` line of the
//! `--config` file (keys are option names without dashes, `-` or `_`
//! alike), then default.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::energy::symbol::{
    alpha_threshold, halton, hamilton_derivative_symbol, sample_on_sigma, CommutantParams, SymbolClass, SIGN_TOL,
};
use crate::energy::{hardy_check, norm_equivalence_check};
use crate::geodesic::{integrate_flow, trace_through_origin, FlowState, FlowSystem, SphereMetric};
use crate::hankel::{eigen_relation_defect, hankel_transform, verify_involution, RadialField, RadialGrid};
use crate::kernel::{
    classify_region, cone_limits, default_deltas, is_mode_jump_nonzero, mode_kernel, sin_pi, KernelError, KernelPoint,
    ModeParams,
};
use crate::oracle::{compare_kernel, solve_mode, FDConfig};
use crate::specfun::{bessel_j, gamma, legendre_q_shifted, BesselOrder};
use crate::suite::{self, Tier};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "diffract", version, about = "Wave kernels with an inverse-square potential in the plane")]
pub struct Cli {
    /// `key = value` file supplying defaults for numeric options
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// write CSV here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// omit the timestamp metadata line
    #[arg(long, global = true)]
    pub reproducible: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate J_ν, Γ or the shifted Legendre function Q_{ν-1/2}
    Specfun(SpecfunArgs),
    /// Involution, Plancherel and eigen-relation defects on refining grids
    HankelCheck(HankelArgs),
    /// Mode kernel on an (r1, t) grid at fixed r2
    KernelGrid(KernelGridArgs),
    /// Limits of a mode kernel on both sides of the diffractive cone
    FrontScan(FrontScanArgs),
    /// ν_n, sin(πν_n) and the jump flag per mode
    ModeTable(ModeTableArgs),
    /// Mode kernel against the finite-difference solve
    OracleCompare(OracleArgs),
    /// Integrate a bicharacteristic on the circle
    Trace(TraceArgs),
    /// Hardy and norm-equivalence checks on random test functions
    EnergyAudit(EnergyArgs),
    /// H_p a on quasi-random points of the characteristic set
    SymbolAudit(SymbolArgs),
    /// Run the ten end-to-end checks
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecFunction {
    BesselJ,
    Gamma,
    LegendreQ,
}

#[derive(Debug, Args)]
pub struct SpecfunArgs {
    #[arg(long, value_enum, default_value = "bessel-j")]
    pub function: SpecFunction,
    /// comma-separated orders (ignored by gamma)
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HankelArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    /// comma-separated graded-grid steps
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    #[arg(long)]
    pub r2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelGridArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub r1_from: Option<f64>,
    #[arg(long)]
    pub r1_to: Option<f64>,
    #[arg(long)]
    pub r1_steps: Option<usize>,
    #[arg(long)]
    pub t_from: Option<f64>,
    #[arg(long)]
    pub t_to: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FrontScanArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub t: Option<f64>,
    /// comma-separated decreasing offsets from the cone
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ModeTableArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub n_max: Option<i64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// sample points `r1:t`, comma-separated; defaults to the built-in set
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<String>>,
    /// also write the stored field slices as (r index, t index, value)
    #[arg(long)]
    pub field_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Full,
    Rescaled,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub span: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    pub system: SystemArg,
    /// carry ζ = 0 flows through r = 0
    #[arg(long)]
    pub through_origin: bool,
    /// keep every k-th state
    #[arg(long)]
    pub every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// comma-separated dimensions
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<u32>>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// defaults to 1.25 α*, with α* found by bisection
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// first Halton index
    #[arg(long)]
    pub start: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// coarser grids, smaller samples, loosened tolerances
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Option resolution: flag, then config file, then default.
struct Settings {
    file: BTreeMap<String, String>,
    used: Vec<(String, String)>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
                file.insert(k.trim().replace('-', "_"), v.trim().to_string());
            }
        }
        Ok(Settings { file, used: Vec::new() })
    }

    fn get<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => {
                    s.parse().map_err(|_| CliError::Usage(format!("config value for {key} does not parse: {s}")))?
                }
                None => default,
            },
        };
        self.used.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    fn get_opt<T: FromStr + ToString + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse().map_err(|_| CliError::Usage(format!("config value for {key} does not parse: {s}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.used.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    fn get_list<T: FromStr + ToString + Clone>(
        &mut self,
        key: &str,
        flag: Option<Vec<T>>,
        default: Vec<T>,
    ) -> Result<Vec<T>, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Usage(format!("config list for {key} does not parse: {s}")))?,
                None => default,
            },
        };
        let text: Vec<String> = value.iter().map(ToString::to_string).collect();
        self.used.push((key.to_string(), text.join(";")));
        Ok(value)
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key} must be positive, got {v}")))
    }
}

fn linspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 || !(to >= from) {
        return Err(CliError::Usage(format!("empty range {from}..{to} with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
fn fmt(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Collected output of one subcommand.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// extra `key=value` metadata
    notes: Vec<(String, String)>,
    failed: bool,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new(), notes: Vec::new(), failed: false }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code. Errors go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nUsage: diffract [OPTIONS] <COMMAND>\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut s = Settings::load(cli.config.as_ref())?;
    let seed = s.get("seed", cli.seed, suite::DEFAULT_SEED)?;
    let (name, table) = match &cli.command {
        Command::Specfun(a) => ("specfun", specfun(a, &mut s)?),
        Command::HankelCheck(a) => ("hankel-check", hankel_check(a, &mut s)?),
        Command::KernelGrid(a) => ("kernel-grid", kernel_grid(a, &mut s)?),
        Command::FrontScan(a) => ("front-scan", front_scan(a, &mut s)?),
        Command::ModeTable(a) => ("mode-table", mode_table(a, &mut s)?),
        Command::OracleCompare(a) => ("oracle-compare", oracle_compare(a, &mut s)?),
        Command::Trace(a) => ("trace", trace(a, &mut s)?),
        Command::EnergyAudit(a) => ("energy-audit", energy_audit(a, &mut s, seed)?),
        Command::SymbolAudit(a) => ("symbol-audit", symbol_audit(a, &mut s)?),
        Command::Verify(a) => ("verify", verify(a)),
    };
    let mut meta =
        vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string()), ("command".to_string(), name.to_string())];
    meta.extend(s.used);
    meta.extend(table.notes.iter().cloned());
    let out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    write_csv(out, &meta, &table, !cli.reproducible)?;
    Ok(!table.failed)
}

fn write_csv<W: Write>(mut out: W, meta: &[(String, String)], table: &Table, timestamp: bool) -> Result<(), CliError> {
    let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# {}", line.join(" "))?;
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "# timestamp={secs}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn specfun(a: &SpecfunArgs, s: &mut Settings) -> Result<Table, CliError> {
    let (lo, hi) = match a.function {
        SpecFunction::BesselJ => (0.0, 10.0),
        SpecFunction::Gamma => (0.5, 5.0),
        SpecFunction::LegendreQ => (1.05, 3.0),
    };
    let orders = s.get_list("orders", a.orders.clone(), vec![0.0, 0.5, 1.0, 2.5])?;
    let from = s.get("from", a.from, lo)?;
    let to = s.get("to", a.to, hi)?;
    let steps = s.get("steps", a.steps, 11)?;
    let xs = linspace(from, to, steps)?;
    let mut t = Table::new(vec!["function", "order", "argument", "value"]);
    match a.function {
        SpecFunction::Gamma => {
            for &x in &xs {
                t.rows.push(vec!["gamma".into(), String::new(), fmt(x), fmt(gamma(x).map_err(numeric)?)]);
            }
        }
        f => {
            for &nu in &orders {
                let order = BesselOrder::new(nu).map_err(|e| CliError::Usage(e.to_string()))?;
                for &x in &xs {
                    let (label, v) = if f == SpecFunction::BesselJ {
                        ("bessel_j", bessel_j(order, x))
                    } else {
                        ("legendre_q", legendre_q_shifted(order, x))
                    };
                    t.rows.push(vec![label.into(), fmt(nu), fmt(x), fmt(v.map_err(numeric)?)]);
                }
            }
        }
    }
    Ok(t)
}

fn hankel_bump(r: f64) -> f64 {
    if r <= 1.0 || r >= 4.0 {
        0.0
    } else {
        let x = (2.0 * r - 5.0) / 3.0;
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn hankel_check(a: &HankelArgs, s: &mut Settings) -> Result<Table, CliError> {
    let nu = s.get("nu", a.nu, 0.0)?;
    let steps = s.get_list("steps", a.steps.clone(), vec![0.2, 0.1, 0.05])?;
    let order = BesselOrder::new(nu).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut t = Table::new(vec!["h", "points", "involution_defect", "plancherel_gap", "eigen_defect"]);
    let lambdas = RadialGrid::uniform(0.25, 4.0).map_err(numeric)?;
    for &h in &steps {
        let h = positive("steps", h)?;
        let grid = RadialGrid::graded(h, 12.0).map_err(numeric)?;
        let g = RadialField::sample(&grid, |r| (-0.5 * r * r).exp()).map_err(numeric)?;
        let involution = verify_involution(&g, order).map_err(numeric)?;
        let hg = hankel_transform(&g, order, &grid).map_err(numeric)?;
        let plancherel = (hg.norm() - g.norm()).abs() / g.norm();
        let fine = RadialGrid::uniform(h / 5.0, 6.0).map_err(numeric)?;
        let bump = RadialField::sample(&fine, hankel_bump).map_err(numeric)?;
        let eigen = eigen_relation_defect(&bump, order, &lambdas).map_err(numeric)?;
        t.rows.push(vec![fmt(h), grid.len().to_string(), fmt(involution), fmt(plancherel), fmt(eigen)]);
    }
    Ok(t)
}

fn mode(a: &ModeArgs, s: &mut Settings, default_a: f64) -> Result<(ModeParams, f64), CliError> {
    let pot = s.get("a", a.a, default_a)?;
    let n = s.get("n", a.n, 0)?;
    let r2 = positive("r2", s.get("r2", a.r2, 1.0)?)?;
    let m = ModeParams::new(n, pot).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((m, r2))
}

fn kernel_grid(a: &KernelGridArgs, s: &mut Settings) -> Result<Table, CliError> {
    let (m, r2) = mode(&a.mode, s, 0.25)?;
    let r1s =
        linspace(s.get("r1_from", a.r1_from, 0.1)?, s.get("r1_to", a.r1_to, 3.0)?, s.get("r1_steps", a.r1_steps, 30)?)?;
    let ts = linspace(s.get("t_from", a.t_from, 0.1)?, s.get("t_to", a.t_to, 3.0)?, s.get("t_steps", a.t_steps, 30)?)?;
    let mut t = Table::new(vec!["r1", "t", "region", "value"]);
    let mut skipped = 0;
    for &time in &ts {
        for &r1 in &r1s {
            let p = KernelPoint::new(r1, r2, time).map_err(|e| CliError::Usage(e.to_string()))?;
            match mode_kernel(m, p) {
                Ok(v) => {
                    let region = classify_region(p, p.default_eps());
                    t.rows.push(vec![fmt(r1), fmt(time), region.label().into(), fmt(v)]);
                }
                Err(KernelError::ConeProximity { .. }) => skipped += 1,
                Err(e) => return Err(numeric(e)),
            }
        }
    }
    t.notes.push(("skipped_near_cone".into(), skipped.to_string()));
    Ok(t)
}

fn front_scan(a: &FrontScanArgs, s: &mut Settings) -> Result<Table, CliError> {
    let (m, r2) = mode(&a.mode, s, 0.25)?;
    let time = s.get("t", a.t, 2.0)?;
    let deltas = s.get_list("deltas", a.deltas.clone(), default_deltas(r2, time).to_vec())?;
    let scan = cone_limits(m, r2, time, &deltas).map_err(|e| match e {
        KernelError::InvalidInput(msg) => CliError::Usage(msg.into()),
        e => numeric(e),
    })?;
    let mut t = Table::new(vec!["delta", "region_two", "region_three", "difference", "extrapolated"]);
    for c in &scan.samples {
        t.rows.push(vec![fmt(c.delta), fmt(c.region_two), fmt(c.region_three), fmt(c.difference), fmt(c.extrapolated)]);
    }
    Ok(t)
}

fn mode_table(a: &ModeTableArgs, s: &mut Settings) -> Result<Table, CliError> {
    let pot = s.get("a", a.a, 0.25)?;
    let n_max = s.get("n_max", a.n_max, 5)?;
    if n_max < 0 {
        return Err(CliError::Usage("n-max must be non-negative".into()));
    }
    let mut t = Table::new(vec!["n", "nu", "sin_pi_nu", "jump_nonzero"]);
    for n in 0..=n_max {
        let m = ModeParams::new(n, pot).map_err(|e| CliError::Usage(e.to_string()))?;
        t.rows.push(vec![n.to_string(), fmt(m.nu), fmt(sin_pi(m.nu)), is_mode_jump_nonzero(n, pot).to_string()]);
    }
    Ok(t)
}

fn oracle_compare(a: &OracleArgs, s: &mut Settings) -> Result<Table, CliError> {
    let (m, r2) = mode(&a.mode, s, 0.25)?;
    let dr = positive("dr", s.get("dr", a.dr, 2e-3)?)?;
    let width = positive("width", s.get("width", a.width, 0.02)?)?;
    let r_max = positive("r_max", s.get("r_max", a.r_max, 4.0)?)?;
    let t_end = positive("t_end", s.get("t_end", a.t_end, 2.6)?)?;
    let samples = match &a.points {
        Some(list) => list
            .iter()
            .map(|p| {
                let (r1, t) = p.split_once(':').ok_or_else(|| CliError::Usage(format!("point {p}: expected r1:t")))?;
                let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("point {p}")));
                KernelPoint::new(parse(r1)?, r2, parse(t)?).map_err(|e| CliError::Usage(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => suite::oracle_samples().into_iter().map(|p| KernelPoint { r2, ..p }).collect(),
    };
    let cfg = FDConfig::new(r_max, dr, t_end, m.nu)
        .and_then(|c| c.with_width(width))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = compare_kernel(m, &cfg, &samples).map_err(numeric)?;
    let mut t = Table::new(vec!["r1", "t", "analytic", "numeric", "rel_err"]);
    for row in &report.rows {
        t.rows.push(vec![fmt(row.point.r1), fmt(row.point.t), fmt(row.analytic), fmt(row.numeric), fmt(row.rel_err)]);
    }
    t.notes.push(("max_rel_err".into(), fmt(report.max_rel_err)));
    t.notes.push(("max_leakage".into(), fmt(report.max_leakage)));
    t.notes.push(("energy_drift".into(), fmt(report.energy_drift)));
    if let Some(path) = &a.field_dump {
        let field = solve_mode(&cfg, r2).map_err(numeric)?;
        let mut w = csv::Writer::from_writer(fs::File::create(path)?);
        w.write_record(["r_index", "t_index", "value"])?;
        for (k, slice) in field.slices.iter().enumerate() {
            for (j, v) in slice.iter().enumerate() {
                w.write_record([j.to_string(), k.to_string(), fmt(*v)])?;
            }
        }
        w.flush()?;
    }
    Ok(t)
}

fn trace(a: &TraceArgs, s: &mut Settings) -> Result<Table, CliError> {
    let r = positive("r", s.get("r", a.r, 2.0)?)?;
    let xi = s.get("xi", a.xi, 3f64.sqrt())?;
    let zeta = s.get("zeta", a.zeta, 1.0)?;
    let tau = s.get("tau", a.tau, 1.0)?;
    let span = positive("span", s.get("span", a.span, 4.0)?)?;
    let step = positive("step", s.get("step", a.step, 1e-3)?)?;
    let every = s.get("every", a.every, 10)?.max(1);
    let y0 = FlowState::circle(0.0, r, 0.0, tau, xi, zeta);
    let system = match a.system {
        SystemArg::Full => FlowSystem::Full,
        SystemArg::Rescaled => FlowSystem::Rescaled,
    };
    let traj = if a.through_origin {
        trace_through_origin(y0, span, step)
    } else {
        integrate_flow(y0, SphereMetric::Circle, span, step, system)
    }
    .map_err(numeric)?;
    let mut t = Table::new(vec!["s", "t", "r", "theta", "tau", "xi", "zeta", "xi_hat", "sigma"]);
    let last = traj.states.len() - 1;
    for (i, y) in traj.states.iter().enumerate() {
        if i % every != 0 && i != last && !traj.crossings.contains(&i) {
            continue;
        }
        t.rows.push(
            [traj.s[i], y.t, y.r, y.theta[0], y.tau, y.xi, y.zeta[0], y.xi_hat(), traj.sigma[i]]
                .iter()
                .map(|v| fmt(*v))
                .collect(),
        );
    }
    t.notes.push(("termination".into(), format!("{:?}", traj.termination)));
    Ok(t)
}

fn energy_audit(a: &EnergyArgs, s: &mut Settings, seed: u64) -> Result<Table, CliError> {
    let dims = s.get_list("dims", a.dims.clone(), vec![3, 4, 5])?;
    let count = s.get("count", a.count, 20)?;
    if dims.iter().any(|&n| n < 3) {
        return Err(CliError::Usage("dimensions must be at least 3".into()));
    }
    let mut t = Table::new(vec!["check", "lhs", "rhs", "margin", "pass"]);
    let push = |t: &mut Table, name: String, lhs: f64, rhs: f64, slack: f64| {
        let pass = lhs <= rhs + slack;
        t.failed |= !pass;
        t.rows.push(vec![name, fmt(lhs), fmt(rhs), fmt(rhs - lhs), pass.to_string()]);
    };
    for &n in &dims {
        for (k, u) in suite::random_functions(seed, count).iter().enumerate() {
            let h = hardy_check(u, n).map_err(numeric)?;
            push(&mut t, format!("hardy/n{n}/u{k}"), h.ratio, h.bound, 2.0 * h.error * h.bound);
            for (j, f) in suite::suite_potentials(n).iter().enumerate() {
                let e = norm_equivalence_check(u, f, n).map_err(numeric)?;
                let (c1, c2) = (e.constants.c1, e.constants.c2);
                push(&mut t, format!("lower/n{n}/f{j}/u{k}"), c1 * e.gradient, e.q, e.error);
                push(&mut t, format!("upper/n{n}/f{j}/u{k}"), e.q, c2 * e.gradient, e.error);
            }
        }
    }
    Ok(t)
}

fn symbol_audit(a: &SymbolArgs, s: &mut Settings) -> Result<Table, CliError> {
    let base = suite::audit_params();
    let c = s.get("c", a.c, base.c)?;
    let delta = s.get("delta", a.delta, base.delta)?;
    let t0 = s.get("t0", a.t0, base.t0)?;
    let tau0 = s.get("tau0", a.tau0, base.tau0)?;
    let count = s.get("count", a.count, 1000)?;
    let start = s.get("start", a.start, suite::AUDIT_START)?;
    let p = CommutantParams::new(c, delta, 1.0, t0, tau0).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut t = Table::new(vec!["t", "r", "theta", "tau", "xi", "zeta", "class", "symbol", "h_p_a"]);
    let p = match s.get_opt("alpha", a.alpha)? {
        Some(alpha) => p.with_alpha(positive("alpha", alpha)?),
        None => {
            let star = alpha_threshold(&p, 2000).map_err(numeric)?;
            t.notes.push(("alpha_star".into(), fmt(star)));
            p.with_alpha(1.25 * star)
        }
    };
    t.notes.push(("alpha_used".into(), fmt(p.alpha)));
    let mut violations = 0;
    for i in start..start + count as u64 {
        let y = sample_on_sigma(&p, halton(i));
        let d = hamilton_derivative_symbol(&p, &y, SphereMetric::Circle).map_err(numeric)?;
        if d.value > SIGN_TOL && matches!(d.class, SymbolClass::Main | SymbolClass::GoodSign) {
            violations += 1;
        }
        t.rows.push(vec![
            fmt(y.t),
            fmt(y.r),
            fmt(y.theta[0]),
            fmt(y.tau),
            fmt(y.xi),
            fmt(y.zeta[0]),
            d.class.label().into(),
            fmt(d.symbol),
            fmt(d.value),
        ]);
    }
    t.notes.push(("violations".into(), violations.to_string()));
    t.failed = violations > 0;
    Ok(t)
}

fn verify(a: &VerifyArgs) -> Table {
    let tier = if a.quick { Tier::Quick } else { Tier::Full };
    let mut t = Table::new(vec!["criterion", "name", "measured", "limit", "status", "detail"]);
    for line in suite::run_all(tier) {
        t.failed |= !line.pass;
        eprintln!(
            "{:>2} {:<24} {} ({:.2} s)",
            line.id,
            line.name,
            if line.pass { "pass" } else { "fail" },
            line.seconds
        );
        t.rows.push(vec![
            line.id.to_string(),
            line.name.into(),
            fmt(line.measured),
            fmt(line.limit),
            if line.pass { "pass" } else { "fail" }.into(),
            line.detail,
        ]);
    }
    t.notes.push(("tier".into(), format!("{tier:?}").to_lowercase()));
    t
}
