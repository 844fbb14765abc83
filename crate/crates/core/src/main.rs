use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use igr::cases::CASE_NAMES;
use igr::config::{parse_with_overrides, RunConfig};
use igr::driver::{fmt_duration, run, run_study, DriverError};

/// Environment variable that replaces the configured output directory.
const OUTPUT_DIR_ENV: &str = "IGR_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "igr", version, about = "Compressible Euler solver with information geometric regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write snapshot CSVs and a report.
    Run {
        config: PathBuf,
        /// `key=value` or `section.key=value`, applied after the file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a convergence study and write study.csv.
    Study {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the available cases.
    Cases,
}

fn load(path: &Path, overrides: &[String]) -> Result<(RunConfig, PathBuf), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg = parse_with_overrides(&text, overrides).map_err(|e| format!("{}: {e}", path.display()))?;
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, dir))
}

fn fail(e: DriverError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Cases => {
            for name in CASE_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, overrides } => {
            let (cfg, dir) = match load(&config, &overrides) {
                Ok(v) => v,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            };
            match run(&cfg, &dir) {
                Ok(out) => {
                    for p in &out.snapshots {
                        println!("wrote {}", p.display());
                    }
                    println!("{} steps in {}", out.report.steps, fmt_duration(out.report.wall_time));
                    if let Some((step, cause)) = &out.report.abort {
                        eprintln!("aborted at step {step}: {cause}");
                    }
                    ExitCode::from(out.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Study { config, overrides } => {
            let (cfg, dir) = match load(&config, &overrides) {
                Ok(v) => v,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            };
            if cfg.study.is_none() {
                eprintln!("error: {}: no study regime configured", config.display());
                return ExitCode::from(1);
            }
            match run_study(&cfg, &dir) {
                Ok((result, path)) => {
                    for r in &result.rows {
                        let order = r.order.map_or_else(String::new, |o| format!("  order {o:.3}"));
                        println!("t {:<6} m {:<6} alpha {:.3e}  L1 sum {:.6e}{order}", r.time, r.m, r.alpha, r.err_sum());
                    }
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
