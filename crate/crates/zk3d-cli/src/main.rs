//! Command-line driver: hypothesis certification, decay runs with CSV and
//! JSON outputs, manufactured-solution convergence studies, inequality
//! suites and the continuous-dependence experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zk3d_cli::commands::{cmd_check, cmd_compare, cmd_ineq, cmd_mms, cmd_run};

#[derive(Parser)]
#[command(
    name = "zk3d",
    about = "3D Zakharov-Kuznetsov simulator and verification harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the theorem constants and certify its hypotheses
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Decay run: write the diagnostics CSV and the JSON summary
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "diagnostics.csv")]
        out_csv: PathBuf,
        #[arg(long, default_value = "summary.json")]
        out_summary: PathBuf,
    },
    /// Manufactured-solution convergence ladder
    Mms {
        #[arg(long)]
        config: PathBuf,
    },
    /// Steklov and interpolation inequality suites
    Ineq {
        #[arg(long)]
        config: PathBuf,
    },
    /// Two-trajectory continuous-dependence experiment
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { config } => cmd_check(config),
        Command::Run {
            config,
            out_csv,
            out_summary,
        } => cmd_run(config, out_csv, out_summary),
        Command::Mms { config } => cmd_mms(config),
        Command::Ineq { config } => cmd_ineq(config),
        Command::Compare { config } => cmd_compare(config),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => e.report(),
    };
    ExitCode::from(code as u8)
}
