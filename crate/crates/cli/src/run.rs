//! Run directories: a manifest written before any data and finalized after.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub seed: u64,
    pub rng: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub status: String,
}

pub struct RunDir {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

impl RunDir {
    pub fn create<C: Serialize>(dir: &Path, experiment: &str, seed: u64, config: &C) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let config =
            serde_json::to_value(config).map_err(|source| CliError::Json { path: dir.join(MANIFEST), source })?;
        let manifest = RunManifest {
            experiment: experiment.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            rng: zerolab::rng::RNG_NAME.to_string(),
            config,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            status: "running".to_string(),
        };
        let run = RunDir { dir: dir.to_path_buf(), manifest, started: Instant::now() };
        run.write_manifest()?;
        Ok(run)
    }

    fn write_manifest(&self) -> CliResult<()> {
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|source| CliError::Json { path: path.clone(), source })?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }

    fn record(&mut self, name: &str) {
        if !self.manifest.outputs.iter().any(|o| o == name) {
            self.manifest.outputs.push(name.to_string());
        }
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        let path = self.dir.join(name);
        let csv_err = |source| CliError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))?;
        self.record(name);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut text =
            serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.clone(), source })?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        self.record(name);
        Ok(())
    }

    /// Record the outcome. Called on failure too, so a partial run says why it stopped.
    pub fn finish(mut self, status: &str) -> CliResult<()> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        self.manifest.status = status.to_string();
        self.write_manifest()
    }
}

pub fn read_manifest(dir: &Path) -> CliResult<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path, source })
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    x.to_string()
}
