use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfc_core::config::{Config, Task};
use qfc_core::run::run_tasks;

/// Design and simulation of cavity-enhanced frequency conversion in
/// poled microrings.
#[derive(Parser)]
#[command(name = "qfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json, summary.txt and CSV outputs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Resonance, phase matching and η_max from geometry and couplings.
    Design(Io),
    /// Conversion efficiency versus pump power.
    Simulate(Io),
    /// η_max over a coupling or loss range.
    Sweep(Io),
    /// Q extraction from a through-port spectrum.
    Fit(Io),
    /// Euler bend and taper geometry.
    Bend(Io),
    /// Pump budget, loss chain and DFB tuning.
    Budget(Io),
    /// Every task listed in the config's `tasks`.
    Run(Io),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QFC_LOG", "warn")).init();
    let cli = Cli::parse();
    let (task, io) = match cli.command {
        Command::Design(io) => (Some(Task::Design), io),
        Command::Simulate(io) => (Some(Task::Simulate), io),
        Command::Sweep(io) => (Some(Task::Sweep), io),
        Command::Fit(io) => (Some(Task::Fit), io),
        Command::Bend(io) => (Some(Task::Bend), io),
        Command::Budget(io) => (Some(Task::Budget), io),
        Command::Run(io) => (None, io),
    };
    match execute(task, &io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(task: Option<Task>, io: &Io) -> qfc_core::Result<()> {
    let cfg = Config::from_path(&io.config)?;
    let tasks = match task {
        Some(t) => vec![t],
        None => cfg.tasks.clone(),
    };
    let base = io.config.parent().unwrap_or(Path::new("."));
    let report = run_tasks(&cfg, &tasks, base)?;
    print!("{}", report.summary_text());
    if let Some(dir) = &io.out {
        report.write_to(dir)?;
    }
    Ok(())
}
