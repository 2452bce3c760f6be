//! Command line front end.
//!
//! Exit status is 0 for a stable verdict or a converged run, 1 for an
//! unstable verdict, a diverged run or a run that hit its iteration budget,
//! and 2 for an indeterminate verdict or any usage, configuration or i/o
//! error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    self, expansion_report, hump_report, tidal_report, write_profile_csv, TableId, EXPANSION_NX,
    HUMP_ROWS, TIDAL_ROWS, TIDAL_TIME,
};
use crate::diagnostics::ErrorReport;
use crate::lattice::{EquilibriumSpec, Family};
use crate::solver::{Simulation, SimulationConfig, SteadyOutcome};
use crate::stability::{self, Verdict, DEFAULT_TOL};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "SWLBM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "swlbm",
    version,
    about = "Shallow water lattice Boltzmann toolkit"
)]
pub struct Cli {
    /// Worker threads for the solver and scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $SWLBM_OUT_DIR, then the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural stability of the BGK collision.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// Run a simulation described by a config file.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Benchmark cases and table sweeps.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Debug, Subcommand)]
pub enum StabilityCmd {
    /// Check one equilibrium at one state.
    Check(CheckArgs),
    /// Verdict map over a gravity grid and, for the λ family, a λ grid.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// d2q7, d2q9-salmon, d2q9-lambda or d2q9-standard.
    #[arg(long, default_value = "d2q9-salmon")]
    pub model: Family,
    /// Lattice speed e = Δx/Δt.
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    /// Reference depth h̄.
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Scaled relaxation time τ/Δt.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub g: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma separated values or `start:stop:count`.
    #[arg(long)]
    pub g_grid: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    /// CSV path, relative to the output directory (default stability_scan.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Run to steady state, or to `--t-end` seconds.
    Run(SimArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Simulation config or a manifest written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<u64>,
    #[arg(long)]
    pub output_cadence: Option<u64>,
    /// Prefix for output files.
    #[arg(long, default_value = "run")]
    pub name: String,
}

#[derive(Debug, Subcommand)]
pub enum BenchCmd {
    /// Steady flow over a hump.
    Hump(HumpArgs),
    /// Tidal wave in a channel.
    Tidal(TidalArgs),
    /// Flow through a sudden expansion.
    Expansion(ExpansionArgs),
    /// Reproduce a results table (T1 to T5).
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct HumpArgs {
    /// Reduced gravity ĝ in lattice units.
    #[arg(long, default_value_t = 0.009)]
    pub g: f64,
    /// `NXxNY`; NX is 125, 250 or 500.
    #[arg(long, default_value = "500x50")]
    pub lattice: String,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TidalArgs {
    /// `NXxNY`; NX is 500, 750 or 1000.
    #[arg(long, default_value = "500x50")]
    pub lattice: String,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    #[arg(long, default_value_t = 0.08)]
    pub g: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    pub table: TableId,
    /// Rows used for the tidal channel; the flow is one dimensional.
    #[arg(long, default_value_t = TIDAL_ROWS)]
    pub tidal_rows: usize,
}

/// Record of one run, enough to repeat it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// End time of a transient run; absent for steady runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SteadyOutcome>,
    pub iterations: u64,
    pub final_r: f64,
    #[serde(default)]
    pub verdicts: Vec<String>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Vec<String>,
    pub config: SimulationConfig,
    #[serde(default)]
    pub history: Vec<ErrorReport>,
}

impl RunManifest {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_toml()?).map_err(|e| io_err(path, e))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Bench(#[from] benchmarks::BenchError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Stability(#[from] stability::StabilityError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parse the arguments, run the command and map the result to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Run a parsed command; returns the exit status 0 or 1 on success.
pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let out = output_dir(cli.out_dir.as_deref());
    let work = || match &cli.command {
        Command::Stability(StabilityCmd::Check(a)) => stability_check(a),
        Command::Stability(StabilityCmd::Scan(a)) => stability_scan(a, &out),
        Command::Sim(SimCmd::Run(a)) => sim_run(a, &out),
        Command::Bench(BenchCmd::Hump(a)) => bench_hump(a, &out),
        Command::Bench(BenchCmd::Tidal(a)) => bench_tidal(a, &out),
        Command::Bench(BenchCmd::Expansion(a)) => bench_expansion(a, &out),
        Command::Bench(BenchCmd::Table(a)) => bench_table(a, &out),
    };
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// `--out-dir`, then `$SWLBM_OUT_DIR`, then the current directory.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Parse `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("malformed grid '{s}'"));
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let values: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![lo],
            _ => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Parse `NXxNY`.
pub fn parse_lattice(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("malformed lattice '{s}', expected NXxNY"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx == 0 || ny == 0 {
        return Err(bad());
    }
    Ok((nx, ny))
}

fn stability_check(a: &CheckArgs) -> Result<u8, CliError> {
    let m = &a.model;
    if a.lambda.is_some() && m.model != Family::D2Q9Lambda {
        return Err(CliError::Usage(
            "--lambda applies to d2q9-lambda only".into(),
        ));
    }
    let spec = EquilibriumSpec::new(m.model, a.g, m.e, a.lambda.unwrap_or(1.0))?;
    let report = stability::verify_stability(&spec, m.hbar, m.tau, m.tol)?;
    println!("model = {}", m.model.name());
    println!(
        "g = {}, e = {}, hbar = {}, tau = {}",
        a.g, m.e, m.hbar, m.tau
    );
    if m.model == Family::D2Q9Lambda {
        println!("lambda = {}", spec.lambda);
    }
    print!(
        "{}",
        toml::to_string(&report).map_err(|e| CliError::Config(e.to_string()))?
    );
    match report.verdict {
        Verdict::Stable => Ok(0),
        Verdict::Unstable => Ok(1),
        Verdict::Indeterminate => Err(CliError::Usage("verdict indeterminate".into())),
    }
}

fn stability_scan(a: &ScanArgs, out: &Path) -> Result<u8, CliError> {
    let m = &a.model;
    let g_grid = parse_grid(&a.g_grid)?;
    let lambda_grid = match &a.lambda_grid {
        Some(s) => parse_grid(s)?,
        None => Vec::new(),
    };
    let template = EquilibriumSpec::new(m.model, 1.0, m.e, 1.0)?;
    let map = stability::scan(&template, &g_grid, &lambda_grid, m.hbar, m.tau, m.tol)?;
    ensure_dir(out)?;
    let path = out.join(
        a.output
            .as_deref()
            .unwrap_or(Path::new("stability_scan.csv")),
    );
    map.save_csv(&path)?;
    let verdicts = map.verdicts();
    let count = |v: Verdict| verdicts.iter().filter(|x| **x == Some(v)).count();
    println!(
        "{} cells: {} stable, {} unstable, {} indeterminate, {} invalid",
        verdicts.len(),
        count(Verdict::Stable),
        count(Verdict::Unstable),
        count(Verdict::Indeterminate),
        verdicts.iter().filter(|x| x.is_none()).count()
    );
    println!("wrote {}", path.display());
    Ok(0)
}

/// Read a simulation config, or the `config` table of a manifest.
pub fn load_config(path: &Path) -> Result<(SimulationConfig, Option<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if value.contains_key("config") && value.contains_key("version") {
        let m: RunManifest = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok((m.config, m.t_end))
    } else {
        let c: SimulationConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok((c, None))
    }
}

fn steady_code(outcome: &SteadyOutcome) -> u8 {
    match outcome {
        SteadyOutcome::Converged => 0,
        _ => 1,
    }
}

fn write_fields(sim: &Simulation, path: &Path) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    sim.write_fields_csv(f)?;
    Ok(())
}

fn manifest(command: String, config: SimulationConfig, started: f64) -> RunManifest {
    RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        started_unix: started,
        finished_unix: started,
        t_end: None,
        outcome: None,
        iterations: 0,
        final_r: f64::NAN,
        verdicts: Vec::new(),
        metrics: BTreeMap::new(),
        outputs: Vec::new(),
        config,
        history: Vec::new(),
    }
}

fn describe(outcome: &SteadyOutcome) -> String {
    match outcome {
        SteadyOutcome::Converged => "converged".into(),
        SteadyOutcome::MaxIterations => "max_iterations".into(),
        SteadyOutcome::Diverged(d) => d.to_string(),
    }
}

fn sim_run(a: &SimArgs, out: &Path) -> Result<u8, CliError> {
    let started = now();
    let (mut config, file_t_end) = load_config(&a.config)?;
    if let Some(t) = a.tau {
        config.tau_hat = t;
    }
    if let Some(n) = a.max_iterations {
        config.max_iterations = n;
    }
    if let Some(c) = a.output_cadence {
        config.output_cadence = c;
    }
    let t_end = a.t_end.or(file_t_end);
    let mut sim = Simulation::new(config.clone())?;
    let mut m = manifest("sim run".into(), config, started);
    m.t_end = t_end;
    let code = match t_end {
        Some(t) => match sim.run_transient(t) {
            Ok(res) => {
                m.iterations = res.steps;
                m.final_r = sim.last_r();
                m.history = res.history;
                m.metrics.insert("t".into(), res.t);
                0
            }
            Err(crate::solver::SolverError::Diverged(d)) => {
                m.iterations = d.step;
                m.outcome = Some(SteadyOutcome::Diverged(d));
                1
            }
            Err(e) => return Err(e.into()),
        },
        None => {
            let res = sim.run_to_steady();
            m.iterations = res.iterations;
            m.final_r = res.final_r;
            m.history = res.history;
            m.outcome = Some(res.outcome);
            steady_code(&res.outcome)
        }
    };
    ensure_dir(out)?;
    let fields = out.join(format!("{}_fields.csv", a.name));
    write_fields(&sim, &fields)?;
    m.outputs.push(fields.display().to_string());
    let path = out.join(format!("{}_manifest.toml", a.name));
    m.finished_unix = now();
    m.save(&path)?;
    match &m.outcome {
        Some(o) => println!(
            "{} after {} steps, R = {:e}",
            describe(o),
            m.iterations,
            m.final_r
        ),
        None => println!("reached t = {} after {} steps", sim.time(), m.iterations),
    }
    println!("wrote {}", path.display());
    Ok(code)
}

fn bench_hump(a: &HumpArgs, out: &Path) -> Result<u8, CliError> {
    let started = now();
    let (nx, ny) = parse_lattice(&a.lattice)?;
    let mut config = match a.lambda {
        Some(l) => benchmarks::hump_lambda_case(a.g, nx, l)?,
        None => benchmarks::hump_case(a.g, nx)?,
    };
    if ny != HUMP_ROWS {
        config.grid.ny = ny;
    }
    let mut sim = Simulation::new(config.clone())?;
    let res = sim.run_to_steady();
    let report = hump_report(&sim, a.g, nx, &res);

    ensure_dir(out)?;
    let stem = format!("hump_g{}_{}", a.g, nx);
    let profile = out.join(format!("{stem}_profile.csv"));
    let f = fs::File::create(&profile).map_err(|e| io_err(&profile, e))?;
    write_profile_csv(&report.profile, f)?;
    let fields = out.join(format!("{stem}_fields.csv"));
    write_fields(&sim, &fields)?;

    let mut m = manifest(
        format!("bench hump --g {} --lattice {}", a.g, a.lattice),
        config,
        started,
    );
    m.outcome = Some(res.outcome);
    m.iterations = res.iterations;
    m.final_r = res.final_r;
    m.history = res.history;
    if let Some(l2) = report.depth_l2 {
        m.metrics.insert("depth_l2".into(), l2);
    }
    if let Some(d) = &report.discharge {
        m.metrics
            .insert("discharge_max_deviation".into(), d.max_deviation);
        m.metrics
            .insert("discharge_l2_deviation".into(), d.l2_deviation);
    }
    m.outputs = vec![profile.display().to_string(), fields.display().to_string()];
    let path = out.join(format!("{stem}_manifest.toml"));
    m.finished_unix = now();
    m.save(&path)?;

    println!(
        "{} after {} iterations, R = {:e}",
        describe(&res.outcome),
        res.iterations,
        res.final_r
    );
    if let Some(l2) = report.depth_l2 {
        println!("depth L2 = {l2:e}");
    }
    println!("wrote {}", path.display());
    Ok(steady_code(&res.outcome))
}

fn bench_tidal(a: &TidalArgs, out: &Path) -> Result<u8, CliError> {
    let started = now();
    let (nx, ny) = parse_lattice(&a.lattice)?;
    let config = benchmarks::tidal_case_rows(nx, ny)?;
    let mut sim = Simulation::new(config.clone())?;
    let mut m = manifest(
        format!("bench tidal --lattice {}", a.lattice),
        config,
        started,
    );
    m.t_end = Some(TIDAL_TIME);
    ensure_dir(out)?;
    let stem = format!("tidal_{nx}");
    let code = match sim.run_transient(TIDAL_TIME) {
        Ok(res) => {
            let report = tidal_report(&sim, nx)?;
            m.iterations = res.steps;
            m.final_r = sim.last_r();
            m.history = res.history;
            m.metrics.insert("t".into(), res.t);
            m.metrics.insert("dx".into(), report.dx);
            m.metrics.insert("depth_l2".into(), report.depth_l2);
            m.metrics.insert("velocity_l2".into(), report.velocity_l2);
            let profile = out.join(format!("{stem}_profile.csv"));
            let f = fs::File::create(&profile).map_err(|e| io_err(&profile, e))?;
            write_profile_csv(&report.profile, f)?;
            m.outputs.push(profile.display().to_string());
            println!(
                "t = {} s after {} steps, depth L2 = {:e}, velocity L2 = {:e}",
                res.t, res.steps, report.depth_l2, report.velocity_l2
            );
            0
        }
        Err(crate::solver::SolverError::Diverged(d)) => {
            println!("{d}");
            m.iterations = d.step;
            m.outcome = Some(SteadyOutcome::Diverged(d));
            1
        }
        Err(e) => return Err(e.into()),
    };
    let path = out.join(format!("{stem}_manifest.toml"));
    m.finished_unix = now();
    m.save(&path)?;
    println!("wrote {}", path.display());
    Ok(code)
}

fn bench_expansion(a: &ExpansionArgs, out: &Path) -> Result<u8, CliError> {
    let started = now();
    let config = benchmarks::expansion_case(a.g, a.lambda)?;
    let mut sim = Simulation::new(config.clone())?;
    let res = sim.run_to_steady();
    let report = expansion_report(&sim, a.g, a.lambda, &res);

    ensure_dir(out)?;
    let stem = format!("expansion_g{}_l{}", a.g, a.lambda);
    let fields = out.join(format!("{stem}_fields.csv"));
    write_fields(&sim, &fields)?;
    let mut m = manifest(
        format!("bench expansion --g {} --lambda {}", a.g, a.lambda),
        config,
        started,
    );
    m.outcome = Some(res.outcome);
    m.iterations = res.iterations;
    m.final_r = res.final_r;
    m.history = res.history;
    m.metrics.insert("min_u1_south".into(), report.min_u1_south);
    m.metrics.insert("min_u1_north".into(), report.min_u1_north);
    m.verdicts
        .push(format!("recirculation = {}", report.recirculates()));
    m.outputs.push(fields.display().to_string());
    let path = out.join(format!("{stem}_manifest.toml"));
    m.finished_unix = now();
    m.save(&path)?;

    println!(
        "{} after {} iterations on {}x{}, R = {:e}, recirculation: {}",
        describe(&res.outcome),
        res.iterations,
        EXPANSION_NX,
        sim.ny(),
        res.final_r,
        report.recirculates()
    );
    println!("wrote {}", path.display());
    Ok(steady_code(&res.outcome))
}

fn bench_table(a: &TableArgs, out: &Path) -> Result<u8, CliError> {
    if a.tidal_rows == 0 {
        return Err(CliError::Usage("--tidal-rows must be at least 1".into()));
    }
    let report = benchmarks::reproduce_table(a.table, a.tidal_rows)?;
    ensure_dir(out)?;
    let path = out.join(format!("table_{:?}.csv", a.table));
    report.save_csv(&path)?;
    let mut matched = 0;
    for r in &report.rows {
        matched += r.classification_match as usize;
        let lambda = r.lambda.map(|l| format!(" lambda={l}")).unwrap_or_default();
        let extra = match (r.l2, r.iteration_deviation) {
            (Some(l2), _) => format!(" L2={l2:.3e}"),
            (None, Some(d)) => format!(" dev={:+.1}%", d * 100.0),
            _ => String::new(),
        };
        println!(
            "{:?} g={}{} lattice={}: {} iterations={}{}",
            r.case, r.g, lambda, r.lattice, r.outcome, r.iterations, extra
        );
    }
    println!(
        "{}/{} cells match the reference classification",
        matched,
        report.rows.len()
    );
    println!("wrote {}", path.display());
    Ok(0)
}
