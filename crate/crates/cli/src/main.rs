use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evh_cli::{cmd_optimize, cmd_pump, cmd_qv, cmd_simulate, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "evh",
    version,
    about = "Electrostatic vibration harvester toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set t_end=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Per-cycle stored voltage and harvested energy.
    Pump(Common),
    /// Exhaustive search of the best switching window.
    Optimize(Common),
    /// Transient simulation with energy audit.
    Simulate(Common),
    /// QV polygons of selected pump cycles.
    Qv {
        #[command(flatten)]
        common: Common,
        /// Cycle indices to draw.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,20")]
        cycles: Vec<usize>,
        /// Simulated trace CSV to overlay.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let load = |c: &Common| RunConfig::load(c.config.as_deref(), &c.overrides);
    match &cli.command {
        Command::Pump(c) => cmd_pump(&load(c)?, &c.out),
        Command::Optimize(c) => cmd_optimize(&load(c)?, &c.out),
        Command::Simulate(c) => cmd_simulate(&load(c)?, &c.out),
        Command::Qv {
            common,
            cycles,
            trace,
        } => cmd_qv(&load(common)?, cycles, trace.as_deref(), &common.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
