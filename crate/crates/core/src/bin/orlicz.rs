use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use orlicz::config::Command;
use orlicz::runner::{run, RunRequest, EXIT_CONFIG};

/// Runs one experiment from a TOML config and writes CSV tables plus manifest.json.
#[derive(Parser)]
#[command(name = "orlicz", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output-dir` from the config, else `out/` next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let report = run(&RunRequest { command: cli.command, config: cli.config, out_dir: cli.out, tol_scale: cli.tol_scale });
    if let Some(m) = &report.message {
        eprintln!("orlicz {}: {m}", cli.command.name());
    }
    if let Some(d) = &report.out_dir {
        eprintln!("outputs in {}", d.display());
    }
    ExitCode::from(report.exit_code as u8)
}
