//! Run manifests: what was run, with which settings, and where the results went.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Ok,
    Partial,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub subcommand: String,
    pub code_version: String,
    /// Fully resolved settings of the run.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub started_unix_s: u64,
    pub finished_unix_s: Option<u64>,
    pub status: RunStatus,
    pub outputs: Vec<PathBuf>,
    #[serde(skip)]
    path: PathBuf,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    /// Writes the manifest to `path` in the `running` state.
    pub fn start(
        path: PathBuf,
        subcommand: &str,
        config: serde_json::Value,
        seeds: Vec<u64>,
    ) -> anyhow::Result<Self> {
        let manifest = RunManifest {
            schema_version: MANIFEST_VERSION,
            command: std::env::args().collect(),
            subcommand: subcommand.to_string(),
            code_version: cra_core::bench::CODE_VERSION.to_string(),
            config,
            seeds,
            started_unix_s: unix_now(),
            finished_unix_s: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
            path,
        };
        manifest.write()?;
        Ok(manifest)
    }

    fn write(&self) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&self.path, text)
            .with_context(|| format!("cannot write manifest {}", self.path.display()))
    }

    pub fn finish(&mut self, status: RunStatus, outputs: Vec<PathBuf>) -> anyhow::Result<()> {
        self.status = status;
        self.outputs = outputs;
        self.finished_unix_s = Some(unix_now());
        self.write()
    }
}

/// `requested`, or a fresh `runs/<subcommand>-<unix time>` directory.
pub fn output_dir(requested: Option<&Path>, subcommand: &str) -> anyhow::Result<PathBuf> {
    let dir = match requested {
        Some(p) => p.to_path_buf(),
        None => {
            let base = PathBuf::from("runs").join(format!("{subcommand}-{}", unix_now()));
            let mut dir = base.clone();
            let mut k = 1;
            while dir.exists() {
                dir = PathBuf::from(format!("{}-{k}", base.display()));
                k += 1;
            }
            dir
        }
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}
