//! Command-line front end: `run <config.json>` and `kernel-eval`.
//!
//! Exit codes: 0 when every criterion passes, 2 when a criterion fails, 1 on
//! usage, configuration or I/O errors.

pub mod config;
pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::kernel::{kernel_dgdx, kernel_dgdx_sided, kernel_g, Coefficients, Side};
use crate::par::Execution;
use config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CRITERION_FAILED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "skewheat",
    version,
    about = "Interface heat kernel and stochastic heat equation checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the suites listed in a JSON configuration.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print G(t, x, y) and dG/dx for the given coefficients.
    #[command(allow_negative_numbers = true)]
    KernelEval {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        rho1: f64,
        #[arg(long)]
        rho2: f64,
        /// One-sided derivative at x = 0.
        #[arg(long)]
        side: Option<Side>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { config, threads } => run(&config, threads, err),
        Command::KernelEval {
            t,
            x,
            y,
            a1,
            a2,
            rho1,
            rho2,
            side,
        } => kernel_eval(t, x, y, [a1, a2, rho1, rho2], side, out).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn run(
    config: &Path,
    threads: Option<usize>,
    log: &mut (dyn Write + Send),
) -> Result<i32, CliError> {
    let cfg = RunConfig::load(config)?;
    let summary = with_threads(threads, || {
        suites::run_suites(&cfg, Execution::default(), log)
    })??;
    for r in summary.records.iter().filter(|r| !r.pass) {
        let _ = writeln!(
            log,
            "FAIL {} {}: measured {} vs threshold {}",
            r.suite, r.criterion, r.measured, r.threshold
        );
    }
    let _ = writeln!(
        log,
        "summary written to {}",
        cfg.output_dir.join("summary.json").display()
    );
    Ok(if summary.all_pass() {
        EXIT_OK
    } else {
        EXIT_CRITERION_FAILED
    })
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R>(threads: Option<usize>, f: impl FnOnce() -> R) -> Result<R, CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        _ => Ok(f()),
    }
}

fn kernel_eval(
    t: f64,
    x: f64,
    y: f64,
    [a1, a2, rho1, rho2]: [f64; 4],
    side: Option<Side>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let c = Coefficients::new(a1, a2, rho1, rho2)?;
    let g = kernel_g(t, x, y, &c)?;
    let dg = match side {
        Some(s) => kernel_dgdx_sided(t, x, y, s, &c)?,
        None if x == 0.0 => {
            return Err(CliError::Usage(
                "x = 0 is the interface, where dG/dx jumps; pass --side left or --side right \
                 for a one-sided derivative"
                    .into(),
            ))
        }
        None => kernel_dgdx(t, x, y, &c)?,
    };
    writeln!(out, "G = {g}")
        .and_then(|_| writeln!(out, "dGdx = {dg}"))
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}
