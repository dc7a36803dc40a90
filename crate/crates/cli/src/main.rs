//! `fracvisco` command-line driver.
//!
//! Exit codes: 0 success, 1 failed checks or I/O and other errors,
//! 2 configuration or usage error, 3 hypothesis or data violation,
//! 4 solver divergence or non-convergence.

mod config;
mod converge;
mod output;
mod run;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracvisco_core::fracops::set_gamma_fault;
use fracvisco_core::Error;

use crate::output::{write_all, Artifact};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(std::io::Error),
    ChecksFailed { failed: usize, total: usize },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Configuration(_) | Error::Domain(_) => 2,
                Error::Hypothesis { .. } | Error::Data(_) => 3,
                Error::Divergence { .. } | Error::Iteration { .. } => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::ChecksFailed { .. } => 1,
        }
    }

    fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "configuration error",
            3 => "hypothesis violation",
            4 => "solver failure",
            _ => "error",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::ChecksFailed { failed, total } => write!(f, "{failed} of {total} checks failed"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fracvisco", version, about = "Fractional Kelvin-Voigt viscoelastic wave solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble, solve and write solution, energy and summary reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run identity and invariant suites and write verify.csv.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: verify::Suite,
        #[arg(long, default_value = "verify-out")]
        out: PathBuf,
        /// Seed for the random trajectories of the energy suite.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_gamma_fault: bool,
    },
    /// Refinement study against the manufactured solution.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = converge::MIN_LEVELS)]
        levels: usize,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FRACVISCO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("FRACVISCO_THREADS must be a positive integer, got \"{raw}\"")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))
}

fn out_dir(flag: Option<PathBuf>, cfg: &config::RunConfig) -> PathBuf {
    flag.or_else(|| cfg.directory.clone()).unwrap_or_else(|| PathBuf::from("fracvisco-out"))
}

fn emit(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    for path in write_all(dir, artifacts).map_err(CliError::Io)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = config::load(&config)?;
            let artifacts = run::run(&cfg)?;
            emit(&out_dir(out, &cfg), &artifacts)
        }
        Command::Verify {
            suite,
            out,
            seed,
            inject_gamma_fault,
        } => {
            set_gamma_fault(inject_gamma_fault);
            let rows = verify::run(suite, seed)?;
            let failed = rows.iter().filter(|r| !r.passed()).count();
            let mut summary = format!("fracvisco verify ({suite:?}, seed {seed})\n");
            for r in rows.iter().filter(|r| !r.passed()) {
                summary.push_str(&format!("FAIL {} / {} / {} alpha={}: {:e}\n", r.suite, r.check, r.case, r.alpha, r.value));
            }
            summary.push_str(&format!("{} of {} checks passed\n", rows.len() - failed, rows.len()));
            print!("{summary}");
            emit(
                &out,
                &[
                    Artifact::new("verify.csv", verify::table(&rows)),
                    Artifact::new("verify_summary.txt", summary.into_bytes()),
                ],
            )?;
            if failed > 0 {
                return Err(CliError::ChecksFailed {
                    failed,
                    total: rows.len(),
                });
            }
            Ok(())
        }
        Command::Converge { config, out, levels } => {
            let cfg = config::load(&config)?;
            let table = converge::converge(&cfg, levels)?;
            let summary = table.summary();
            print!("{summary}");
            emit(
                &out_dir(out, &cfg),
                &[
                    Artifact::new("convergence.csv", table.to_csv()),
                    Artifact::new("convergence_summary.txt", summary.into_bytes()),
                ],
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracvisco: {}: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
