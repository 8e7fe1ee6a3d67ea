//! Batch front-end for the `fidmem` library: parameter sweeps, figure
//! datasets and feasibility reports written as CSV plus a run manifest.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Mode, Overrides, RunConfig};
pub use error::CliError;
pub use output::{RunOutput, Table};

/// Runs a validated configuration and writes its outputs. Returns the
/// process exit code: 0 on success, 2 if any point failed to converge.
pub fn run_to_disk(cfg: &RunConfig) -> Result<u8, CliError> {
    let out = run::execute(cfg)?;
    output::write_outputs(cfg, &out)?;
    Ok(if out.converged() { 0 } else { 2 })
}
