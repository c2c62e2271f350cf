//! Command-line front end: calibration, checks, the convergence experiment
//! and profile dumps, reported as JSON envelopes or CSV tables.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kernels::{
    check_bessel_derivative_bound, check_heat_crude_bound, check_heat_l2_and_tail, check_heat_sharp_bound, check_local_l1,
    heat_kernel, infinity_kernel_bound_check, riesz_kernel,
};
use crate::multipliers::{
    check_dyadic_sobolev_growth, check_hhat_tail, check_hjr_derivative_norms, check_mellin_decay, support_length_check, DerivativeSweep,
    RieszParams, TailConfig,
};
use crate::quadrature::QuadratureSpec;
use crate::report::{linspace, logspace, BoundReport};
use crate::riesz::{convergence_experiment, critical_index, ConvergenceReport, TestFunction, CONVERGENCE_THRESHOLD};
use crate::space::{modular_check, phi0_bound_check, volume_check, SpaceParams};
use crate::specfun::ComplexOrder;
use crate::sph_transform::{calibrate, calibration, install_calibration, Calibration, CALIBRATION_VERSION};

/// Names accepted by `verify --check`.
pub const CHECKS: [&str; 14] = [
    "phi0",
    "modular",
    "vol",
    "heat-crude",
    "heat-sharp",
    "heat-tail",
    "l1ball",
    "kappa-inf",
    "bessel-deriv",
    "alexo6",
    "alexo7",
    "hhat",
    "mellin",
    "sobolev-growth",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical budget failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(e) => match e {
                Error::InvalidParameter(_) | Error::UnsupportedOrder(_) | Error::DerivativeDepth(_) | Error::GammaPole(_) => 2,
                _ => 3,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hyperriesz", version, about = "Riesz means and kernel estimates on real hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure and persist the inverse-transform constant for H^n.
    Calibrate(CommonArgs),
    /// Run estimate checks.
    Verify(VerifyArgs),
    /// Run the Riesz means convergence experiment on a heat kernel.
    Converge(ConvergeArgs),
    /// Dump the Riesz kernel profile.
    Kernel(KernelArgs),
    /// Dump the heat kernel profile.
    Heat(HeatArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Dimension of H^n.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long = "rel-tol", default_value_t = 1e-11)]
    pub rel_tol: f64,
    #[arg(long = "abs-tol", default_value_t = 1e-15)]
    pub abs_tol: f64,
    /// Persisted calibration constants.
    #[arg(long = "calibration-file", default_value = "hyperriesz-calibration.json")]
    #[serde(skip)]
    pub calibration_file: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrderArgs {
    #[arg(long = "z-re")]
    pub z_re: Option<f64>,
    #[arg(long = "z-im", default_value_t = 0.0)]
    pub z_im: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub order: OrderArgs,
    /// Check to run; repeatable.
    #[arg(long = "check", conflicts_with = "all")]
    pub checks: Vec<String>,
    /// Run every check.
    #[arg(long)]
    pub all: bool,
    /// Spectral scale for single-R checks.
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Grid of R - ρ² as min:max:count[:log|:lin].
    #[arg(long = "R-grid")]
    pub r_grid: Option<GridSpec>,
    /// Gaussian width parameter of the heat tail check.
    #[arg(long = "D", default_value_t = 8.0)]
    pub d: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub order: OrderArgs,
    /// Lebesgue exponent in [1, 2] fixing the critical index.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Time of the heat kernel used as test function.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Grid of R - ρ² as min:max:count[:log|:lin].
    #[arg(long = "R-grid", default_value = "10:10000:4:log")]
    pub r_grid: GridSpec,
    /// Sample radii as min:max:count[:log|:lin].
    #[arg(long = "x-grid", default_value = "0:3:13:lin")]
    pub x_grid: GridSpec,
    /// Largest final sup error of a converging run.
    #[arg(long, default_value_t = CONVERGENCE_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub order: OrderArgs,
    #[arg(long = "R")]
    pub big_r: f64,
    /// Radii as min:max:count[:log|:lin].
    #[arg(long = "r-grid", default_value = "0:10:101:lin")]
    pub r_grid: GridSpec,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeatArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Radii as min:max:count[:log|:lin].
    #[arg(long = "r-grid", default_value = "0:10:101:lin")]
    pub r_grid: GridSpec,
}

/// `min:max:count` with optional `:log` or `:lin` spacing (default `log`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected min:max:count[:log|:lin], got {s:?}"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let count = parts[2].parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
        let log = match parts.get(3) {
            None | Some(&"log") => true,
            Some(&"lin") => false,
            Some(other) => return Err(format!("spacing must be log or lin, got {other:?}")),
        };
        if !(min.is_finite() && max.is_finite() && min <= max && count >= 1) {
            return Err(format!("grid needs finite min <= max and count >= 1, got {s:?}"));
        }
        if log && !(min > 0.0) {
            return Err(format!("log grid needs min > 0, got {s:?}"));
        }
        Ok(Self { min, max, count, log })
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.log {
            logspace(self.min, self.max, self.count)
        } else {
            linspace(self.min, self.max, self.count)
        }
    }
}

/// A rectangular table of numbers with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "report", rename_all = "kebab-case")]
pub enum EntryBody {
    Bound(BoundReport),
    Convergence(ConvergenceReport),
    Calibration(Calibration),
    Profile(Table),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub passed: bool,
    #[serde(flatten)]
    pub body: EntryBody,
}

impl Entry {
    fn bound(name: impl Into<String>, report: BoundReport) -> Self {
        Self {
            name: name.into(),
            passed: report.passed,
            body: EntryBody::Bound(report),
        }
    }

    fn table(&self) -> Table {
        match &self.body {
            EntryBody::Bound(r) => Table {
                columns: r.columns.clone(),
                rows: r.rows.clone(),
            },
            EntryBody::Convergence(c) => {
                let mut columns = vec!["R".to_string(), "sup_error".to_string()];
                columns.extend(c.xs.iter().map(|x| format!("error_x={x}")));
                let rows = c
                    .big_rs
                    .iter()
                    .zip(&c.sup_errors)
                    .zip(&c.errors)
                    .map(|((r, s), e)| [*r, *s].into_iter().chain(e.iter().copied()).collect())
                    .collect();
                Table { columns, rows }
            }
            EntryBody::Calibration(c) => Table {
                columns: vec!["n".into(), "constant".into(), "residual".into()],
                rows: vec![vec![c.n as f64, c.constant, c.residual]],
            },
            EntryBody::Profile(t) => t.clone(),
        }
    }
}

/// The JSON document written by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub entries: Vec<Entry>,
    pub passed: bool,
}

impl ReportEnvelope {
    fn new(command: &str, config: &impl Serialize, entries: Vec<Entry>) -> CliResult<Self> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            passed: entries.iter().all(|e| e.passed),
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One table for single-entry commands; otherwise the long format
    /// `check,row,column,value` over all entries.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let [entry] = self.entries.as_slice() {
            let table = entry.table();
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(|v| fmt_number(*v))).expect("in-memory write");
            }
        } else {
            w.write_record(["check", "row", "column", "value"]).expect("in-memory write");
            for entry in &self.entries {
                let table = entry.table();
                for (i, row) in table.rows.iter().enumerate() {
                    for (col, v) in table.columns.iter().zip(row) {
                        w.write_record([entry.name.as_str(), &i.to_string(), col, &fmt_number(*v)]).expect("in-memory write");
                    }
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Versioned calibration constants keyed by `n`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStore {
    pub version: u32,
    pub entries: BTreeMap<u32, Calibration>,
}

impl CalibrationStore {
    /// The stored constants; a missing, unreadable or stale file yields an
    /// empty store.
    pub fn load(path: &Path) -> Self {
        std::fs::read(path)
            .ok()
            .and_then(|b| serde_json::from_slice::<Self>(&b).ok())
            .filter(|s| s.version == CALIBRATION_VERSION)
            .unwrap_or(Self {
                version: CALIBRATION_VERSION,
                entries: BTreeMap::new(),
            })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(self).expect("calibration serializes");
        s.push('\n');
        write_atomic(path, s.as_bytes())
    }
}

fn space(common: &CommonArgs) -> CliResult<SpaceParams> {
    if common.n < 2 {
        return Err(CliError::Config(format!("n must be >= 2, got {}", common.n)));
    }
    Ok(SpaceParams::new(common.n)?)
}

fn quadrature(common: &CommonArgs) -> CliResult<QuadratureSpec> {
    let q = QuadratureSpec {
        rel_tol: common.rel_tol,
        abs_tol: common.abs_tol,
        ..QuadratureSpec::default()
    };
    q.validate()?;
    Ok(q)
}

/// Makes a calibration for `n` available: from the process cache, the
/// persisted store, or by computing and persisting it.
fn ensure_calibration(sp: &SpaceParams, q: &QuadratureSpec, path: &Path) -> CliResult<Calibration> {
    if let Some(c) = calibration(sp.n()) {
        return Ok(c);
    }
    let mut store = CalibrationStore::load(path);
    if let Some(c) = store.entries.get(&sp.n()).filter(|c| c.version == CALIBRATION_VERSION) {
        if let Ok(c) = install_calibration(*c) {
            return Ok(c);
        }
    }
    let c = calibrate(sp, q)?;
    store.entries.insert(sp.n(), c);
    store.save(path)?;
    Ok(c)
}

fn order(o: &OrderArgs, default_re: f64) -> CliResult<ComplexOrder> {
    let re = o.z_re.unwrap_or(default_re);
    if re < 0.0 {
        return Err(CliError::Config(format!("Re z must be >= 0, got {re}")));
    }
    Ok(ComplexOrder::new(re, o.z_im)?)
}

fn cmd_calibrate(args: &CommonArgs) -> CliResult<ReportEnvelope> {
    let sp = space(args)?;
    let q = quadrature(args)?;
    let c = calibrate(&sp, &q)?;
    let mut store = CalibrationStore::load(&args.calibration_file);
    store.entries.insert(sp.n(), c);
    store.save(&args.calibration_file)?;
    let entry = Entry {
        name: "calibration".into(),
        passed: true,
        body: EntryBody::Calibration(c),
    };
    ReportEnvelope::new("calibrate", args, vec![entry])
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<ReportEnvelope> {
    let names: Vec<String> = if args.all {
        CHECKS.iter().map(|s| s.to_string()).collect()
    } else if args.checks.is_empty() {
        return Err(CliError::Config(format!("give --all or --check <name>; valid names: {}", CHECKS.join(", "))));
    } else {
        args.checks.clone()
    };
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
        return Err(CliError::Config(format!("unknown check {bad:?}; valid names: {}", CHECKS.join(", "))));
    }
    let sp = space(&args.common)?;
    let q = quadrature(&args.common)?;
    ensure_calibration(&sp, &q, &args.common.calibration_file)?;
    let mut entries = Vec::new();
    for name in &names {
        entries.extend(run_check(name, args, &sp, &q)?);
    }
    ReportEnvelope::new("verify", args, entries)
}

fn run_check(name: &str, args: &VerifyArgs, sp: &SpaceParams, q: &QuadratureSpec) -> CliResult<Vec<Entry>> {
    let n = sp.n() as f64;
    let rho2 = sp.rho().powi(2);
    let offsets = args.r_grid.as_ref().map_or_else(|| vec![1.0, 10.0, 100.0, 1000.0, 10000.0], GridSpec::points);
    let big_rs: Vec<f64> = offsets.iter().map(|s| rho2 + s).collect();
    let given = |default: &[f64]| -> CliResult<Vec<ComplexOrder>> {
        match args.order.z_re {
            Some(_) => Ok(vec![order(&args.order, 0.0)?]),
            None => default.iter().map(|&re| order(&args.order, re)).collect(),
        }
    };
    let heat_ts = logspace(0.005, 10.0, 16);
    let heat_rs = linspace(0.0, 10.0, 41);
    let entries = match name {
        "phi0" => vec![Entry::bound(name, phi0_bound_check(sp, 0.1, 20.0, 100, q)?)],
        "modular" => vec![Entry::bound(name, modular_check(sp, 20.0, 200)?)],
        "vol" => vec![Entry::bound(name, volume_check(sp, 40, q)?)],
        "heat-crude" => vec![Entry::bound(name, check_heat_crude_bound(sp, &heat_ts, &heat_rs, q)?)],
        "heat-sharp" => vec![Entry::bound(name, check_heat_sharp_bound(sp, &heat_ts, &heat_rs, q)?)],
        "heat-tail" => {
            let r = check_heat_l2_and_tail(sp, &logspace(0.05, 2.0, 8), &linspace(0.5, 5.0, 10), args.d, q)?;
            vec![Entry::bound("heat-l2", r.l2), Entry::bound("heat-tail", r.tail)]
        }
        "l1ball" => given(&[0.5 * n + 0.6])?
            .into_iter()
            .map(|z| Ok(Entry::bound(format!("l1ball z={}", z.re()), check_local_l1(sp, z, &offsets, 10.0, q)?)))
            .collect::<CliResult<_>>()?,
        "kappa-inf" => {
            let zs = given(&[n - 0.5, n + 1.0])?;
            vec![Entry::bound(name, infinity_kernel_bound_check(sp, &zs, &big_rs, &linspace(1.1, 10.0, 41), 0.15, q)?)]
        }
        "bessel-deriv" => {
            let z = order(&args.order, 2.0)?;
            if !z.is_real() {
                return Err(CliError::Config("bessel-deriv needs real z".into()));
            }
            let rs: Vec<f64> = linspace(1.0, 100.0, 12).into_iter().map(|s| rho2 + s).collect();
            (0..=3)
                .map(|a| {
                    let r = check_bessel_derivative_bound(sp, z.re(), a, &rs, &linspace(0.5, 10.0, 40))?;
                    Ok(Entry::bound(format!("bessel-deriv a={a}"), r))
                })
                .collect::<CliResult<_>>()?
        }
        "alexo6" => vec![Entry::bound(name, support_length_check(sp, order(&args.order, 3.0)?, 8, &[2.0, 8.0, 32.0])?)],
        "alexo7" => vec![Entry::bound(name, check_hjr_derivative_norms(sp, order(&args.order, 3.0)?, &DerivativeSweep::default())?)],
        "hhat" => {
            let p = RieszParams::new(*sp, args.big_r.unwrap_or(4096.0), order(&args.order, 3.0)?)?;
            let js: Vec<u32> = (3..=8).collect();
            (1..=2)
                .map(|k| Ok(Entry::bound(format!("hhat k={k}"), check_hhat_tail(&p, &js, k, 0.2, &TailConfig::default(), q)?)))
                .collect::<CliResult<_>>()?
        }
        "mellin" => given(&[1.0, 2.5])?
            .into_iter()
            .map(|z| Ok(Entry::bound(format!("mellin z={}", z.re()), check_mellin_decay(z, 5.0, 200.0, 40, 0.2, q)?)))
            .collect::<CliResult<_>>()?,
        "sobolev-growth" => vec![Entry::bound(name, check_dyadic_sobolev_growth(sp, &logspace(1.0, 300.0, 10), 3, 0.2)?)],
        _ => unreachable!("check names are validated"),
    };
    Ok(entries)
}

fn cmd_converge(args: &ConvergeArgs) -> CliResult<ReportEnvelope> {
    let sp = space(&args.common)?;
    let q = quadrature(&args.common)?;
    let z0 = critical_index(sp.n(), args.p).map_err(|_| CliError::Config(format!("p must lie in [1, 2], got {}", args.p)))?;
    let z = order(&args.order, z0 + 0.1)?;
    ensure_calibration(&sp, &q, &args.common.calibration_file)?;
    let rho2 = sp.rho().powi(2);
    let big_rs: Vec<f64> = args.r_grid.points().into_iter().map(|s| rho2 + s).collect();
    let rep = convergence_experiment(&sp, z, &TestFunction::Heat { t: args.t }, args.p, &args.x_grid.points(), &big_rs, args.threshold, &q)?;
    let entry = Entry {
        name: "converge".into(),
        passed: rep.verdict != crate::riesz::Verdict::NotConverging,
        body: EntryBody::Convergence(rep),
    };
    ReportEnvelope::new("converge", args, vec![entry])
}

fn profile_entry(name: &str, rs: &[f64], values: &[num_complex::Complex64], floor: &[f64]) -> Entry {
    let rows = rs
        .iter()
        .zip(values)
        .zip(floor)
        .map(|((r, v), f)| vec![*r, v.re, v.im, *f])
        .collect();
    Entry {
        name: name.into(),
        passed: true,
        body: EntryBody::Profile(Table {
            columns: ["r", "re", "im", "floor"].map(String::from).to_vec(),
            rows,
        }),
    }
}

fn cmd_kernel(args: &KernelArgs) -> CliResult<ReportEnvelope> {
    let sp = space(&args.common)?;
    let q = quadrature(&args.common)?;
    let z = order(&args.order, 0.5 * sp.n() as f64 + 0.6)?;
    let p = RieszParams::new(sp, args.big_r, z)?;
    ensure_calibration(&sp, &q, &args.common.calibration_file)?;
    let rs = args.r_grid.points();
    let k = riesz_kernel(&sp, &p, &rs, &q)?;
    ReportEnvelope::new("kernel", args, vec![profile_entry("kernel", &rs, k.values(), &k.floor)])
}

fn cmd_heat(args: &HeatArgs) -> CliResult<ReportEnvelope> {
    let sp = space(&args.common)?;
    let q = quadrature(&args.common)?;
    ensure_calibration(&sp, &q, &args.common.calibration_file)?;
    let rs = args.r_grid.points();
    let k = heat_kernel(&sp, args.t, &rs, &q)?;
    ReportEnvelope::new("heat", args, vec![profile_entry("heat", &rs, k.values(), &k.floor)])
}

/// Runs a parsed command and returns its report.
pub fn execute(cli: &Cli) -> CliResult<ReportEnvelope> {
    match &cli.command {
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Heat(a) => cmd_heat(a),
    }
}

fn common(cli: &Cli) -> &CommonArgs {
    match &cli.command {
        Command::Calibrate(a) => a,
        Command::Verify(a) => &a.common,
        Command::Converge(a) => &a.common,
        Command::Kernel(a) => &a.common,
        Command::Heat(a) => &a.common,
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit
/// code: 0 pass, 1 check failure, 2 configuration error, 3 numerical failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let envelope = match execute(&cli) {
        Ok(env) => env,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let c = common(&cli);
    let text = match c.format {
        Format::Json => envelope.to_json(),
        Format::Csv => envelope.to_csv(),
    };
    let written = match &c.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for entry in envelope.entries.iter().filter(|e| !e.passed) {
        eprintln!("check failed: {}", entry.name);
    }
    i32::from(!envelope.passed)
}
