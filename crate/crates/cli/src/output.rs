//! Run artifacts: CSV tables and the JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Collects the files of one run and writes the manifest at the end.
pub struct Run {
    dir: PathBuf,
    command: &'static str,
    files: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct Versions {
    efie_core: &'static str,
    efie_cli: &'static str,
}

#[derive(Serialize)]
struct Seeds {
    /// Start vector of the Lanczos norm estimates behind `C`.
    norm_start_vector: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a ExperimentConfig,
    versions: Versions,
    seeds: Seeds,
    platform: String,
    outputs: &'a [String],
    wall_time_s: f64,
}

pub const MANIFEST: &str = "manifest.json";

impl Run {
    pub fn new(dir: &Path, command: &'static str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        // Fail early on a read-only directory rather than after the solve.
        let probe = dir.join(".write-test");
        fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
        fs::remove_file(&probe)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn finish(self, config: &ExperimentConfig) -> Result<PathBuf> {
        let manifest = Manifest {
            command: self.command,
            config,
            versions: Versions {
                efie_core: efie_core::VERSION,
                efie_cli: env!("CARGO_PKG_VERSION"),
            },
            seeds: Seeds {
                norm_start_vector: efie_core::linalg::NORM_START_SEED,
            },
            platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            outputs: &self.files,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

/// File-name fragment for a frequency, e.g. `3e8` or `100`.
pub fn freq_tag(f: f64) -> String {
    format!("{f:e}").replace(".", "p")
}
