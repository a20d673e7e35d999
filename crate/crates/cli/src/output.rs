//! Atomic file output and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Collects the files of one run and writes them plus a manifest.
pub struct RunOutput {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl RunOutput {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            dir: cfg.output.dir.clone(),
            prefix: cfg.prefix(),
            written: Vec::new(),
        }
    }

    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.prefix))
    }

    pub fn write(&mut self, ext: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(ext);
        write_atomic(&path, contents)?;
        log::info!("wrote {}", path.display());
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `<prefix>.json` and returns every path written.
    pub fn finish(mut self, cfg: &ExperimentConfig, result: Value) -> Result<Vec<PathBuf>, CliError> {
        let manifest_path = self.path("json");
        let outputs: Vec<String> = self
            .written
            .iter()
            .chain(std::iter::once(&manifest_path))
            .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
            .collect();
        let text = manifest(cfg, &outputs, result);
        self.write("json", &text)?;
        Ok(self.written)
    }
}

pub fn config_sha256(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn git_describe() -> Option<String> {
    let out = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

/// RFC 3339 time of the run; SOURCE_DATE_EPOCH pins it for reproducible output.
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn manifest(cfg: &ExperimentConfig, outputs: &[String], result: Value) -> String {
    let m = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.map(|k| k.name()),
        "config": cfg,
        "config_sha256": config_sha256(cfg),
        "git_describe": git_describe(),
        "outputs": outputs,
        "result": result,
        "timestamp": timestamp(),
    });
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    text.push('\n');
    text
}
