use std::fs;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::run::read_manifest;

/// Print the manifest of a run directory and check its outputs exist.
pub fn run(ctx: &Context) -> CliResult<()> {
    let dir = ctx.out.clone().ok_or_else(|| CliError::config("report needs --out DIR"))?;
    let m = read_manifest(&dir)?;
    println!("experiment   {}", m.experiment);
    println!("status       {}", m.status);
    println!("seed         {}", m.seed);
    println!("rng          {}", m.rng);
    println!("tool version {}", m.tool_version);
    println!("wall time    {:.3} s", m.wall_time_s);
    for name in &m.outputs {
        let path = dir.join(name);
        let meta = fs::metadata(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let lines = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                fs::read_to_string(&path)
                    .map_err(|source| CliError::Io { path: path.clone(), source })?
                    .lines()
                    .count()
                    .saturating_sub(1)
                    .to_string()
                    + " rows"
            }
            _ => String::new(),
        };
        println!("output       {name} ({} bytes) {lines}", meta.len());
    }
    Ok(())
}
