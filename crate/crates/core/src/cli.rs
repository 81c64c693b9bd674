//! Command-line front end: `run`, `gen`, `compare` and `table1`.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::cores::{run, table1_check, CoreConfig, CoreKind, SimError};
use crate::predictor::PolicyKind;
use crate::stats::{compare, RunStats, StatsError};
use crate::trace::{gen_kernel, parse_trace, write_trace, Trace, TraceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "itpsim", version, about = "Trace-driven simulator of an issue-time-prediction core")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one trace on one machine.
    Run(RunArgs),
    /// Generate a synthetic kernel trace.
    Gen(GenArgs),
    /// Run every trace on every configuration and tabulate.
    Compare(CompareArgs),
    /// Check the worked scheduling example against its reference cycles.
    Table1(Table1Args),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Flat `key = value` machine description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's `core`.
    #[arg(long)]
    pub core: Option<String>,
    /// Overrides the config's `policy`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Per-op event log (JSON lines).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Stats output; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Glob selecting trace files.
    #[arg(long)]
    pub traces: String,
    /// Config files; each file stem is that run's label.
    #[arg(long, num_args = 1.., required = true)]
    pub configs: Vec<PathBuf>,
    #[arg(long)]
    pub baseline: String,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    /// Keys applied on top of the reference machine for both cores.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Mismatch(String),
    #[error("{failed} of {total} runs failed")]
    RunsFailed {
        failed: usize,
        total: usize,
        internal: bool,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(e) if e.is_internal() => EXIT_INTERNAL,
            CliError::RunsFailed { internal: true, .. } => EXIT_INTERNAL,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            _ => EXIT_INVALID,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_trace(path: &Path) -> Result<Trace, CliError> {
    let mut trace = parse_trace(&read(path)?).map_err(|source| CliError::Trace {
        path: path.to_path_buf(),
        source,
    })?;
    trace.meta.name = stem(path);
    Ok(trace)
}

pub fn load_config(path: &Path) -> Result<CoreConfig, CliError> {
    CoreConfig::parse(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let trace = load_trace(&a.trace)?;
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => CoreConfig::default(),
    };
    if let Some(core) = &a.core {
        cfg.core = core.parse::<CoreKind>().map_err(CliError::Usage)?;
    }
    if let Some(policy) = &a.policy {
        cfg.policy.kind = policy
            .parse::<PolicyKind>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = run(&trace, &cfg)?;
    if let Some(events) = &a.events {
        write_or_print(Some(events), &out.log.to_jsonl())?;
    }
    write_or_print(a.out.as_deref(), &out.stats.to_json())
}

fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let trace = gen_kernel(&a.kernel, a.iters, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    write_or_print(a.out.as_deref(), &write_trace(&trace))
}

fn cmd_compare(a: &CompareArgs) -> Result<(), CliError> {
    let mut traces: Vec<PathBuf> = glob::glob(&a.traces)
        .map_err(|e| CliError::Usage(format!("bad glob `{}`: {e}", a.traces)))?
        .filter_map(Result::ok)
        .collect();
    traces.sort();
    if traces.is_empty() {
        return Err(CliError::Usage(format!("no traces match `{}`", a.traces)));
    }
    let labels: Vec<String> = a.configs.iter().map(|p| stem(p)).collect();
    if !labels.contains(&a.baseline) {
        return Err(CliError::Usage(format!(
            "baseline `{}` is not one of the config labels ({})",
            a.baseline,
            labels.join(", ")
        )));
    }
    let configs = a
        .configs
        .iter()
        .map(|p| load_config(p))
        .collect::<Result<Vec<_>, _>>()?;
    let loaded = traces
        .iter()
        .map(|p| load_trace(p))
        .collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..loaded.len())
        .flat_map(|t| (0..configs.len()).map(move |c| (t, c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    // Collecting an indexed parallel iterator keeps input order.
    let results: Vec<Result<RunStats, SimError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, c)| run(&loaded[t], &configs[c]).map(|o| o.stats))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failed = 0;
    let mut internal = false;
    for (&(t, c), r) in jobs.iter().zip(results) {
        match r {
            Ok(stats) => rows.push((labels[c].clone(), stats)),
            Err(e) => {
                failed += 1;
                internal |= e.is_internal();
                eprintln!("run {} x {} failed: {e}", traces[t].display(), labels[c]);
            }
        }
    }
    if !rows.is_empty() {
        let table = compare(&rows, &a.baseline)?;
        for w in &table.warnings {
            eprintln!("warning: {w}");
        }
        write_or_print(a.csv.as_deref(), &table.to_csv())?;
    }
    if failed > 0 {
        return Err(CliError::RunsFailed {
            failed,
            total: jobs.len(),
            internal,
        });
    }
    Ok(())
}

fn cmd_table1(a: &Table1Args) -> Result<(), CliError> {
    let overlay = match &a.config {
        Some(p) => Some(read(p)?),
        None => None,
    };
    let machine = |core| -> Result<CoreConfig, CliError> {
        let base = CoreConfig::table1(core);
        match &overlay {
            Some(text) => CoreConfig::parse_over(base, text).map_err(|e| CliError::Usage(e.to_string())),
            None => Ok(base),
        }
    };
    let report = table1_check(&machine(CoreKind::InOrder)?, &machine(CoreKind::Proposed)?)?;
    write_or_print(None, &report.render())?;
    if report.passed() {
        write_or_print(None, "all reference cycles match\n")
    } else {
        Err(CliError::Mismatch(format!(
            "reference mismatch:\n  {}",
            report.mismatches.join("\n  ")
        )))
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Table1(a) => cmd_table1(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
