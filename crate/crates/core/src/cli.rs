//! Command-line experiment runner: `run`, `gen` and `report`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::energy::EnergyPolicy;
use crate::engine::{run, FaultConfig, MetricsReport, Policy, RunConfig, Trace, CSV_HEADER};
use crate::error::Error;
use crate::platform::Platform;
use crate::time::Time;
use crate::workload::{load_workload, GenSpec, Workload};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_INTEGRITY: i32 = 4;

/// An error with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    /// Classifies an error raised while simulating.
    fn from_run(e: Error) -> Self {
        let code = match e {
            Error::PolicyWorkloadMismatch { .. }
            | Error::NoDeadline(_)
            | Error::NoAppDeadline(_)
            | Error::NeedTwoProcessors
            | Error::GangTooLarge { .. } => EXIT_MISMATCH,
            Error::InvalidConfig(_) | Error::InvalidPolicy { .. } | Error::MandatoryOverload(_) => EXIT_CONFIG,
            Error::ReportMismatch(_) => EXIT_INTEGRITY,
            _ => EXIT_FAILURE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_FAILURE,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Parser, Debug)]
#[command(name = "schedarena", version, about = "Scheduling policy simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a workload under a policy for one or more seeds.
    Run(RunArgs),
    /// Generate a synthetic workload file.
    Gen(GenArgs),
    /// Recompute metrics from trace files and aggregate them.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["workload", "generate"]))]
pub struct RunArgs {
    /// Platform JSON file; defaults to `--procs` unit-speed processors.
    #[arg(long)]
    pub platform: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub procs: usize,
    /// Workload JSON file.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    /// Generator spec, e.g. `dag:count=5,layers=4,fanout=3,cost=uniform:1:10`.
    #[arg(long = "gen")]
    pub generate: Option<String>,
    #[arg(long)]
    pub policy: String,
    /// Comma-separated seeds or inclusive ranges `a-b`.
    #[arg(long, env = "SCHEDARENA_SEED", default_value = "0")]
    pub seeds: String,
    #[arg(long)]
    pub fault_lambda: Option<f64>,
    #[arg(long)]
    pub checkpoint_interval: Option<f64>,
    /// Time each checkpoint pauses its application.
    #[arg(long, default_value_t = 0.0)]
    pub checkpoint_overhead: f64,
    #[arg(long, default_value = "none")]
    pub energy: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write each run's event trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Generator spec.
    pub spec: String,
    #[arg(long, env = "SCHEDARENA_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Everything that determines a sweep, echoed next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub platform: Option<PathBuf>,
    pub procs: usize,
    pub workload: Option<PathBuf>,
    pub generator: Option<String>,
    pub policy: String,
    pub faults: Option<FaultConfig>,
    pub energy: String,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub format: Format,
    pub trace: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.workload.is_some() == self.generator.is_some() {
            return Err(CliError::config(
                "exactly one of a workload file and a generator spec is required",
            ));
        }
        if self.seeds.is_empty() {
            return Err(CliError::config("at least one seed is required"));
        }
        self.policy.parse::<Policy>().map_err(CliError::config)?;
        self.energy.parse::<EnergyPolicy>().map_err(CliError::config)?;
        if let Some(f) = &self.faults {
            f.validate().map_err(CliError::config)?;
        }
        Ok(())
    }
}

impl TryFrom<&RunArgs> for ExperimentConfig {
    type Error = CliError;

    fn try_from(a: &RunArgs) -> Result<Self, CliError> {
        let faults = match (a.fault_lambda, a.checkpoint_interval) {
            (None, None) => None,
            (lambda, k) => Some(FaultConfig {
                lambda: lambda.unwrap_or(0.0),
                checkpoint_interval: k.map(Time::from_f64),
                overhead: Time::from_f64(a.checkpoint_overhead),
            }),
        };
        let cfg = ExperimentConfig {
            platform: a.platform.clone(),
            procs: a.procs,
            workload: a.workload.clone(),
            generator: a.generate.clone(),
            policy: a.policy.clone(),
            faults,
            energy: a.energy.clone(),
            seeds: parse_seeds(&a.seeds)?,
            out: a.out.clone(),
            format: a.format,
            trace: a.trace,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `1,2,7-9` into `[1, 2, 7, 8, 9]`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::config(format!("invalid seed list {s:?}"));
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Mean and sample standard deviation of one metric across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Stat {
    pub metric: String,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
    /// Per-run values in input order.
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Aggregate {
    pub runs: usize,
    pub stats: Vec<Stat>,
}

impl Aggregate {
    pub fn of(reports: &[MetricsReport]) -> Self {
        let metrics: [(&str, fn(&MetricsReport) -> Option<f64>); 8] = [
            ("tasks", |r| Some(r.tasks as f64)),
            ("avgResponse", |r| r.avg_response),
            ("makespan", |r| Some(r.makespan.as_f64())),
            ("tgr", |r| r.tgr),
            ("avgTardiness", |r| r.avg_tardiness),
            ("energyJoules", |r| Some(r.energy_joules)),
            ("avgPrecision", |r| r.avg_precision),
            ("rollbacks", |r| Some(r.rollbacks as f64)),
        ];
        let stats = metrics
            .iter()
            .map(|(name, get)| {
                let values: Vec<Option<f64>> = reports.iter().map(get).collect();
                let present: Vec<f64> = values.iter().flatten().copied().collect();
                let n = present.len() as f64;
                let mean = (!present.is_empty()).then(|| present.iter().sum::<f64>() / n);
                let stddev = mean
                    .filter(|_| present.len() > 1)
                    .map(|m| (present.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt());
                Stat {
                    metric: name.to_string(),
                    mean,
                    stddev,
                    values,
                }
            })
            .collect();
        Aggregate {
            runs: reports.len(),
            stats,
        }
    }

    pub fn stat(&self, metric: &str) -> Option<&Stat> {
        self.stats.iter().find(|s| s.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["metric".to_string(), "mean".into(), "stddev".into()];
        head.extend((0..self.runs).map(|i| format!("run{i}")));
        w.write_record(&head).expect("in-memory write");
        for s in &self.stats {
            let mut row = vec![s.metric.clone(), opt(s.mean), opt(s.stddev)];
            row.extend(s.values.iter().map(|v| opt(*v)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub reports: Vec<MetricsReport>,
    pub aggregate: Aggregate,
}

fn load_inputs(cfg: &ExperimentConfig, seed: u64) -> Result<(Platform, Workload), CliError> {
    let platform = match &cfg.platform {
        Some(p) => Platform::load(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
        None if cfg.procs == 0 => return Err(CliError::config("at least one processor is required")),
        None => Platform::uniform(cfg.procs),
    };
    let workload = match (&cfg.workload, &cfg.generator) {
        (Some(w), _) => load_workload(w).map_err(|e| CliError::config(format!("{}: {e}", w.display())))?,
        (None, Some(g)) => {
            let spec: GenSpec = g.parse().map_err(CliError::config)?;
            spec.generate(seed).map_err(CliError::config)?
        }
        (None, None) => return Err(CliError::config("no workload given")),
    };
    Ok((platform, workload))
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<MetricsReport, CliError> {
    let (platform, workload) = load_inputs(cfg, seed)?;
    let rc = RunConfig {
        policy: cfg.policy.parse().map_err(CliError::config)?,
        energy: cfg.energy.parse().map_err(CliError::config)?,
        faults: cfg.faults,
        seed,
    };
    let out = run(&workload, &platform, &rc).map_err(CliError::from_run)?;
    let dir = cfg.out.join(format!("seed-{seed}"));
    let echo = ExperimentConfig {
        seeds: vec![seed],
        ..cfg.clone()
    };
    write_atomic(&dir.join("metrics.json"), out.report.to_json().as_bytes())?;
    write_atomic(&dir.join("metrics.csv"), out.report.to_csv().as_bytes())?;
    let echo = serde_json::to_string_pretty(&echo).expect("config serializes");
    write_atomic(&dir.join("config.echo.json"), echo.as_bytes())?;
    if cfg.trace {
        write_atomic(&dir.join("trace.jsonl"), out.trace.to_jsonl(&out.report).as_bytes())?;
    }
    Ok(out.report)
}

/// Runs every seed of the sweep in parallel and writes per-seed and
/// aggregate artifacts under `cfg.out`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let results: Vec<Result<MetricsReport, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .map(|&seed| s.spawn(move || run_seed(cfg, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let aggregate = Aggregate::of(&reports);
    let json = serde_json::to_string_pretty(&aggregate).expect("aggregate serializes");
    write_atomic(&cfg.out.join("aggregate.json"), json.as_bytes())?;
    write_atomic(&cfg.out.join("aggregate.csv"), aggregate.to_csv().as_bytes())?;
    let echo = serde_json::to_string_pretty(cfg).expect("config serializes");
    write_atomic(&cfg.out.join("config.echo.json"), echo.as_bytes())?;
    Ok(RunSummary { reports, aggregate })
}

/// Writes a generated workload; the output depends only on spec and seed.
pub fn cmd_gen(spec: &str, seed: u64, out: &Path) -> Result<Workload, CliError> {
    let spec: GenSpec = spec.parse().map_err(CliError::config)?;
    let w = spec.generate(seed).map_err(CliError::config)?;
    write_atomic(out, w.to_json().as_bytes())?;
    Ok(w)
}

/// Recomputes every trace's metrics and checks them against the report
/// embedded in the trace file.
pub fn cmd_report(traces: &[PathBuf]) -> Result<(Vec<MetricsReport>, Aggregate), CliError> {
    let mut reports = Vec::new();
    for path in traces {
        let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let (trace, embedded) = Trace::read_jsonl(BufReader::new(file)).map_err(|e| CliError {
            code: EXIT_INTEGRITY,
            message: format!("{}: {e}", path.display()),
        })?;
        let recomputed = MetricsReport::from_trace(&trace);
        let integrity = |msg: &str| CliError {
            code: EXIT_INTEGRITY,
            message: format!("{}: {msg}", path.display()),
        };
        let embedded = embedded.ok_or_else(|| integrity("no embedded report"))?;
        if recomputed != embedded {
            return Err(integrity("recomputed metrics differ from the embedded report"));
        }
        reports.push(recomputed);
    }
    let aggregate = Aggregate::of(&reports);
    Ok((reports, aggregate))
}

fn print_reports(reports: &[MetricsReport], format: Format) {
    match format {
        Format::Json => {
            for r in reports {
                println!("{}", serde_json::to_string(r).expect("report serializes"));
            }
        }
        Format::Csv => {
            println!("{}", CSV_HEADER.join(","));
            for r in reports {
                println!("{}", r.csv_row().join(","));
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = ExperimentConfig::try_from(&args)?;
            let summary = cmd_run(&cfg)?;
            print_reports(&summary.reports, cfg.format);
            for r in &summary.reports {
                eprintln!("seed {} trace {}", r.seed, r.trace_hash);
            }
        }
        Command::Gen(args) => {
            cmd_gen(&args.spec, args.seed, &args.out)?;
        }
        Command::Report(args) => {
            let (_, aggregate) = cmd_report(&args.traces)?;
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&aggregate).expect("aggregate serializes")
                ),
                Format::Csv => print!("{}", aggregate.to_csv()),
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the chosen subcommand, returning the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
