use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use usc_raman::cli::{run, Overrides, EXIT_CONFIG};
use usc_raman::config::Task;

/// Raman spectra of a driven ultrastrong-coupling cavity-QED system.
#[derive(Parser)]
#[command(name = "usc-raman", version)]
struct Args {
    #[command(subcommand)]
    task: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for grid sweeps.
    #[arg(long, global = true, env = "USC_RAMAN_WORKERS")]
    workers: Option<usize>,

    /// Output file; a `.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Restrict the emission grid to `center,half_width`.
    #[arg(long, global = true, value_name = "CENTER,HALF_WIDTH")]
    zoom: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dressed energy levels of the sensor-free system.
    Eigen,
    /// Sensor emission spectrum at one drive frequency.
    Spectrum,
    /// Excitation-emission map over drive and sensor frequencies.
    Map,
    /// Golden-rule Raman line table.
    Raman,
    /// Label spectral features by their dressed transitions.
    Classify,
    /// Run the built-in numerical self-checks.
    Verify,
}

impl From<Command> for Task {
    fn from(c: Command) -> Self {
        match c {
            Command::Eigen => Task::Eigen,
            Command::Spectrum => Task::Spectrum,
            Command::Map => Task::Map,
            Command::Raman => Task::Raman,
            Command::Classify => Task::Classify,
            Command::Verify => Task::Verify,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let overrides = Overrides {
        config: args.config,
        workers: args.workers,
        out: args.out,
        zoom: args.zoom,
    };
    ExitCode::from(run(args.task.into(), &overrides) as u8)
}
