use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fidmem_cli::{run_to_disk, Mode, Overrides, RunConfig};

/// Free-induction-decay memory simulator: sweeps, optimizations, figure
/// datasets and feasibility reports.
#[derive(Parser, Debug)]
#[command(name = "fidmem", version)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// TOML configuration file; flags take precedence over its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Publication-density sweeps instead of desk-scale ones.
    #[arg(long)]
    dense: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Optimizer tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Also rerun every simulated point at doubled resolution.
    #[arg(long)]
    refine: bool,
    /// Figure number (2-6) in figure mode.
    #[arg(long)]
    id: Option<u8>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let flags = Overrides {
        out: args.out,
        dense: args.dense,
        workers: args.workers,
        tol: args.tol,
        refine: args.refine,
        figure_id: args.id,
    };
    let result = RunConfig::from_file(args.mode, args.config.as_deref(), flags).and_then(|cfg| run_to_disk(&cfg));
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => {
            eprintln!("fidmem: some points did not converge; see manifest.toml");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("fidmem: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
