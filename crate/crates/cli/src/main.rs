use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xxzlab_cli::config::RunConfig;
use xxzlab_cli::{oracle_check, report, run, CliError, RunOptions};

/// Exact-diagonalization transport laboratory for XXZ fermion chains.
///
/// Spectra are cached on disk when XXZLAB_CACHE_DIR is set.
#[derive(Parser)]
#[command(name = "xxzlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every task at every sweep point of a configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Maximal number of (task, point) evaluations.
        #[arg(long)]
        budget: Option<usize>,
        /// Sequential linear algebra for bitwise reproducible records
        /// (default: on when a verify task is requested).
        #[arg(long)]
        deterministic: Option<bool>,
    },
    /// Render tables from a results directory.
    Report {
        /// Results directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare every formulation against the free-fermion closed forms.
    OracleCheck {
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = true)]
        deterministic: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            budget,
            deterministic,
        } => {
            let cfg = RunConfig::load(&config)?;
            let summary = run(
                &cfg,
                &RunOptions {
                    out,
                    threads,
                    budget,
                    deterministic,
                },
            )?;
            print!("{}", summary.table());
            Ok(ExitCode::from(summary.exit_code() as u8))
        }
        Command::Report { out } => {
            let rep = report::render(&out)?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            report::write(&out, &rep)?;
            print!("{}", rep.markdown());
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck { threads, deterministic } => {
            xxzlab::set_deterministic(deterministic);
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            let cases = oracle_check::run_regression()?;
            let mut failed = 0;
            let mut total = 0;
            for case in &cases {
                for c in &case.comparisons {
                    total += 1;
                    if !c.passes() {
                        failed += 1;
                        println!(
                            "FAIL {} {}: |Δ| = {:.3e} > {:.0e}",
                            case.label, c.formulation, c.diff, c.tolerance
                        );
                    }
                }
            }
            println!("{} cases, {total} comparisons, {failed} failed", cases.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
