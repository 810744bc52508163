use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcrit_cli::config::SweepConfig;
use qcrit_cli::error::{CliError, ExitStatus};
use qcrit_cli::sweep::{run_sweep, SweepOptions};
use qcrit_cli::{acceptance, fit, plot};

#[derive(Debug, Parser)]
#[command(name = "qcrit", version, about = "Sweeps, scaling fits and plots for quantum-critical chains")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Output directory, overriding the configured one.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Recompute every spectrum and write no cache entries.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML file.
    Sweep { config: PathBuf },
    /// Fit finite-size scaling laws to a sweep table.
    Fit { config: PathBuf },
    /// Write a plotting script next to a sweep table.
    Plot { spec: PathBuf },
    /// Run the acceptance criteria (all, or the listed ids).
    Verify { ids: Vec<u8> },
}

/// Makes OpenBLAS use its Haswell kernels unless the caller chose otherwise;
/// the auto-selected AVX-512 DGEMM kernel of some builds is wrong.
#[cfg(all(unix, target_arch = "x86_64"))]
fn pin_blas_kernel() {
    use std::os::unix::process::CommandExt;

    if std::env::var_os("OPENBLAS_CORETYPE").is_some() {
        return;
    }
    let Ok(exe) = std::env::current_exe() else { return };
    let mut cmd = std::process::Command::new(exe);
    cmd.args(std::env::args_os().skip(1)).env("OPENBLAS_CORETYPE", "Haswell");
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        cmd.env("OPENBLAS_NUM_THREADS", "1");
    }
    let err = cmd.exec();
    eprintln!("qcrit: warning: could not pin the BLAS kernel: {err}");
}

#[cfg(not(all(unix, target_arch = "x86_64")))]
fn pin_blas_kernel() {}

fn run(cli: Cli) -> Result<ExitStatus, CliError> {
    let opts = SweepOptions { jobs: cli.jobs.map(usize::from), out: cli.out.clone(), use_cache: !cli.no_cache };
    match cli.command {
        Command::Sweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let summary = run_sweep(&cfg, &config, &opts)?;
            eprintln!(
                "{} points ({} from cache, {} failed) -> {}",
                summary.points,
                summary.cache_hits,
                summary.failed_points,
                summary.out_dir.display()
            );
            for t in &summary.tables {
                eprintln!("  {}", t.display());
            }
            Ok(if summary.failed_points > 0 { ExitStatus::NumericFailure } else { ExitStatus::Ok })
        }
        Command::Fit { config } => {
            let summary = fit::scaling_report(&config, &opts)?;
            eprintln!(
                "{} fits ({} poor, {} failed) -> {}",
                summary.groups,
                summary.flagged,
                summary.failed,
                summary.output.display()
            );
            Ok(if summary.failed > 0 { ExitStatus::NumericFailure } else { ExitStatus::Ok })
        }
        Command::Plot { spec } => {
            let script = plot::plot_emit(&spec)?;
            eprintln!("{}", script.display());
            Ok(ExitStatus::Ok)
        }
        Command::Verify { ids } => {
            if let Some(bad) = ids.iter().find(|&&id| !acceptance::CRITERIA.iter().any(|c| c.0 == id)) {
                return Err(CliError::config("verify", format!("no criterion {bad}; ids run from 1 to 14")));
            }
            let mut failed = 0;
            for report in acceptance::run(&ids) {
                println!("{}", report.headline());
                for line in report.detail_lines() {
                    println!("{line}");
                }
                failed += usize::from(!report.passed());
            }
            if failed > 0 {
                println!("{failed} criteria failed");
            }
            Ok(if failed > 0 { ExitStatus::NumericFailure } else { ExitStatus::Ok })
        }
    }
}

fn main() -> ExitCode {
    pin_blas_kernel();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::Config as u8 } else { ExitStatus::Ok as u8 });
        }
    };
    let status = match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            eprintln!("qcrit: error: {e}");
            e.exit_status()
        }
        Err(_) => ExitStatus::Internal,
    };
    ExitCode::from(status as u8)
}
