pub mod avg;
pub mod bessel;
pub mod circle;
pub mod flow;
pub mod kernel;
pub mod perturb;
pub mod report;

use std::path::PathBuf;

use serde::Serialize;

use crate::config::FileConfig;
use crate::error::{CliError, CliResult};
use crate::run::RunDir;

pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub exact: bool,
    pub file: FileConfig,
}

impl Context {
    pub fn run_dir(&self, experiment: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(experiment))
    }

    pub fn reject_exact(&self, experiment: &str) -> CliResult<()> {
        if self.exact {
            return Err(CliError::config(format!("--exact is not supported by {experiment}")));
        }
        Ok(())
    }
}

/// Create the run directory and manifest, run `body`, and finalize the
/// manifest with the outcome.
pub fn execute<C: Serialize>(
    ctx: &Context,
    experiment: &str,
    config: &C,
    body: impl FnOnce(&mut RunDir) -> CliResult<()>,
) -> CliResult<()> {
    let mut run = RunDir::create(&ctx.run_dir(experiment), experiment, ctx.seed, config)?;
    match body(&mut run) {
        Ok(()) => run.finish("ok"),
        Err(e) => {
            let status = format!("failed (exit {}): {e}", e.exit_code());
            // The original error is more useful than a second one from the manifest.
            let _ = run.finish(&status);
            Err(e)
        }
    }
}

fn positive(name: &str, value: usize) -> CliResult<()> {
    if value == 0 {
        return Err(CliError::config(format!("{name} must be positive")));
    }
    Ok(())
}
