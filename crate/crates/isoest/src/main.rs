use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use isoest::output::{to_csv, to_json, write_atomic};
use isoest::tables::{self, BOUND_SLACK};
use isoest::DEFAULT_SEED;
use isoest_core::protocol::{Schedule, Strategy};
use serde::Serialize;

/// Optimal estimation of unknown isometry channels: exact fidelities,
/// protocol sweeps, program costs and a Monte-Carlo cross-check.
#[derive(Parser)]
#[command(name = "isoest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal fidelity F_est(n, d, D) with bounds and solver diagnostics.
    Fidelity {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Fidelity over a range of n, with scaling and extrapolation columns.
    Scan {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        range: NRange,
        #[command(flatten)]
        window: Window,
        #[command(flatten)]
        out: Output,
    },
    /// Program cost against retrieval error, with a fitted slope.
    Cost {
        #[arg(long, default_value = "est")]
        strategy: String,
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        range: NRange,
        #[command(flatten)]
        window: Window,
        /// Also report the cost in qubits (half the bit count).
        #[arg(long)]
        qubits: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Monte-Carlo estimate of the optimal protocol against the exact value.
    Oracle {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Generator seed (default 0xC0FFEE).
        #[arg(long, value_parser = parse_seed)]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Hamiltonian check for the isometry and unitary rotation families.
    Hnks {
        #[arg(long)]
        d: usize,
        /// Number of equally spaced angles on [0, π].
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Queries needed by estimate-and-store and by coherent storage.
    Queries {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001, 0.0001])]
        eps: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Dims {
    /// Input dimension.
    #[arg(long)]
    d: usize,
    /// Output dimension.
    #[arg(long = "D")]
    big_d: usize,
}

#[derive(Args)]
struct NRange {
    /// Explicit query counts (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Arithmetic step between n-min and n-max.
    #[arg(long, conflicts_with = "points")]
    n_step: Option<usize>,
    /// Number of geometrically spaced points between n-min and n-max.
    #[arg(long)]
    points: Option<usize>,
}

impl NRange {
    fn resolve(&self) -> anyhow::Result<Vec<usize>> {
        let mut ns = self.n.clone();
        match (self.n_min, self.n_max) {
            (Some(lo), Some(hi)) => {
                if lo == 0 || lo > hi {
                    bail!(invalid(format!("empty n range [{lo}, {hi}]")));
                }
                match self.points {
                    Some(k) if k >= 2 => {
                        let ratio = (hi as f64 / lo as f64).ln() / (k - 1) as f64;
                        ns.extend((0..k).map(|i| (lo as f64 * (ratio * i as f64).exp()).round() as usize));
                    }
                    Some(_) => bail!(invalid("--points needs at least 2".into())),
                    None => {
                        let step = self.n_step.unwrap_or(1);
                        if step == 0 {
                            bail!(invalid("--n-step must be positive".into()));
                        }
                        ns.extend((lo..=hi).step_by(step));
                    }
                }
            }
            (None, None) => {}
            _ => bail!(invalid("--n-min and --n-max go together".into())),
        }
        ns.sort_unstable();
        ns.dedup();
        if ns.is_empty() {
            bail!(invalid("no query counts given (use --n or --n-min/--n-max)".into()));
        }
        Ok(ns)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    Power,
    Balanced,
    Widest,
}

#[derive(Args)]
struct Window {
    /// Fixed window width N.
    #[arg(long = "N", conflicts_with_all = ["t", "schedule"])]
    big_n: Option<usize>,
    /// Exponent for N = ⌊n^t⌋.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleKind>,
}

impl Window {
    fn resolve(&self, default: Option<Schedule>) -> Option<Schedule> {
        if let Some(big_n) = self.big_n {
            return Some(Schedule::Fixed(big_n));
        }
        match (self.schedule, self.t) {
            (Some(ScheduleKind::Power), t) | (None, t @ Some(_)) => Some(Schedule::Power(t.unwrap_or(0.5))),
            (Some(ScheduleKind::Balanced), _) => Some(Schedule::Balanced),
            (Some(ScheduleKind::Widest), _) => Some(Schedule::Widest),
            (None, None) => default,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Inconsistent(String),
    OracleMiss(f64),
}

fn invalid(msg: String) -> isoest_core::Error {
    isoest_core::Error::InvalidParameter(msg)
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn emit(out: &Output, text: String) -> anyhow::Result<()> {
    match &out.out {
        Some(path) => write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render<T: Serialize, R: Serialize>(format: Format, rows: &[R], whole: &T) -> anyhow::Result<String> {
    Ok(match format {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(whole)?,
    })
}

#[derive(Serialize)]
struct Table<'a, R, X> {
    command: &'static str,
    d: usize,
    #[serde(rename = "D")]
    big_d: usize,
    #[serde(flatten)]
    extra: X,
    rows: &'a [R],
}

#[derive(Serialize)]
struct NoExtra {}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Fidelity { dims, n, out } => {
            let s = tables::fidelity_summary(n, dims.d, dims.big_d)?;
            let text = render(out.format.unwrap_or(Format::Json), std::slice::from_ref(&CsvFidelity::from(&s)), &s)?;
            emit(&out, text)?;
            Ok(if s.consistent { Status::Ok } else { Status::Inconsistent("fidelity violates its bounds".into()) })
        }
        Command::Scan { dims, range, window, out } => {
            let ns = range.resolve()?;
            let rows = tables::scan_rows(dims.d, dims.big_d, &ns, window.resolve(None))?;
            let whole = Table { command: "scan", d: dims.d, big_d: dims.big_d, extra: NoExtra {}, rows: &rows };
            emit(&out, render(out.format.unwrap_or(Format::Csv), &rows, &whole)?)?;
            let bad = rows.iter().find(|r| {
                !(r.fidelity > 0.0 && r.fidelity <= 1.0 + BOUND_SLACK)
                    || r.achieved.is_some_and(|a| a > r.fidelity + BOUND_SLACK)
            });
            Ok(match bad {
                Some(r) => Status::Inconsistent(format!("row n = {} is out of range", r.n)),
                None => Status::Ok,
            })
        }
        Command::Cost { strategy, dims, range, window, qubits, out } => {
            let strategy: Strategy = strategy.parse()?;
            let default = match strategy {
                Strategy::Estimation => Schedule::Power(0.5),
                Strategy::Pbt | Strategy::Cptp => Schedule::Widest,
            };
            let schedule = window.resolve(Some(default)).expect("default supplied");
            let ns = range.resolve()?;
            let mut rows = tables::cost_rows(strategy, dims.d, dims.big_d, &ns, schedule)?;
            if qubits {
                rows.iter_mut().for_each(|r| r.cost_qubits = Some(r.cost_bits / 2.0));
            }
            let fit = tables::cost_fit(&rows);
            #[derive(Serialize)]
            struct Extra {
                strategy: String,
                schedule: String,
                fit: Option<isoest::fit::LineFit>,
            }
            let extra = Extra { strategy: strategy.to_string(), schedule: format!("{schedule:?}"), fit };
            let whole = Table { command: "cost", d: dims.d, big_d: dims.big_d, extra, rows: &rows };
            emit(&out, render(out.format.unwrap_or(Format::Csv), &rows, &whole)?)?;
            match fit {
                Some(f) => eprintln!("fit: slope={} offset={} points={}", f.slope, f.offset, f.points),
                None => eprintln!("fit: not enough distinct points"),
            }
            let bad = rows.iter().any(|r| !(0.0..=1.0).contains(&r.eps) || r.cost_bits < 0.0);
            Ok(if bad { Status::Inconsistent("cost row out of range".into()) } else { Status::Ok })
        }
        Command::Oracle { dims, n, samples, seed, out } => {
            let s = tables::oracle_summary(n, dims.d, dims.big_d, samples, seed.unwrap_or(DEFAULT_SEED))?;
            emit(&out, render(out.format.unwrap_or(Format::Json), std::slice::from_ref(&s), &s)?)?;
            Ok(if s.sigma_distance > 3.0 { Status::OracleMiss(s.sigma_distance) } else { Status::Ok })
        }
        Command::Hnks { d, points, out } => {
            let s = tables::hnks_summary(d, &tables::theta_grid(points))?;
            let format = out.format.unwrap_or(Format::Json);
            if format == Format::Csv {
                bail!(invalid("hnks output is JSON only".into()));
            }
            emit(&out, to_json(&s)?)?;
            Ok(if s.isometry_max_abs <= 1e-14 && s.unitary_theta_spread <= 1e-12 && s.unitary_expected_residual <= 1e-12 {
                Status::Ok
            } else {
                Status::Inconsistent("Hamiltonian check failed".into())
            })
        }
        Command::Queries { dims, eps, out } => {
            if eps.is_empty() {
                bail!(invalid("empty ε grid".into()));
            }
            let rows = tables::query_rows(dims.d, dims.big_d, &eps)?;
            let whole = Table { command: "queries", d: dims.d, big_d: dims.big_d, extra: NoExtra {}, rows: &rows };
            emit(&out, render(out.format.unwrap_or(Format::Csv), &rows, &whole)?)?;
            Ok(Status::Ok)
        }
    }
}

/// Flat view of a fidelity report for CSV, without the eigenvector.
#[derive(Serialize)]
struct CsvFidelity {
    n: usize,
    d: usize,
    #[serde(rename = "D")]
    big_d: usize,
    fidelity: f64,
    infidelity: f64,
    iterations: usize,
    residual: f64,
    rowsum_bound: f64,
    jensen_bound: f64,
    consistent: bool,
}

impl From<&tables::FidelitySummary> for CsvFidelity {
    fn from(s: &tables::FidelitySummary) -> Self {
        Self {
            n: s.n,
            d: s.d,
            big_d: s.big_d,
            fidelity: s.fidelity,
            infidelity: s.infidelity,
            iterations: s.iterations,
            residual: s.residual,
            rowsum_bound: s.rowsum_bound,
            jensen_bound: s.jensen_bound,
            consistent: s.consistent,
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use isoest_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::NoConvergence { .. } | E::Inconsistent(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconsistent(msg)) => {
            eprintln!("error: consistency check failed: {msg}");
            ExitCode::from(2)
        }
        Ok(Status::OracleMiss(sigma)) => {
            eprintln!("error: Monte-Carlo mean is {sigma:.2} standard errors from the exact value");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
