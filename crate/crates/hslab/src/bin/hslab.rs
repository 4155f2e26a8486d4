//! Thin command-line front end over the scenario runner.

use clap::{Parser, Subcommand};
use hslab::cli;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hslab", version, about = "Variational experiments for doubly-critical Hardy-Sobolev problems")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the scenario named in the config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// Dry-run parameter check: report which theorem regime applies.
    Validate { config: PathBuf },
    /// Recompute and cross-check all oracle constants and certifications.
    CertifyOracles {
        #[arg(long, default_value = "runs/oracle-certify")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args) -> hslab::Result<ExitCode> {
    match args.command {
        Command::Run { config, out, seed, plots } => {
            let cfg = cli::load_config(&config)?;
            let summary = cli::run(&cfg, out.as_deref(), seed, plots)?;
            for check in &summary.checks {
                let tag = if check.pass { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", check.name, check.detail);
            }
            println!(
                "scenario {} -> {} ({} checks)",
                summary.scenario,
                summary.out_dir.display(),
                summary.checks.len()
            );
            if summary.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Validate { config } => {
            let cfg = cli::load_config(&config)?;
            println!("{}", cli::validate(&cfg)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::CertifyOracles { out } => {
            std::fs::create_dir_all(&out)?;
            let output = cli::scenarios::run_oracle_certify(&out, 0, false)?;
            let mut ok = true;
            for check in &output.checks {
                let tag = if check.pass { "PASS" } else { "FAIL" };
                ok &= check.pass;
                println!("[{tag}] {}: {}", check.name, check.detail);
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
