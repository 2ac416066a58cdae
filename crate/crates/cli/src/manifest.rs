//! Run manifest: records what a run produced and how long it took.
//!
//! The data files themselves (JSON / JSONL / CSV) are the deterministic
//! artifacts — same config, same bytes. The manifest carries wall-clock
//! timings, which obviously vary, so it is written last and is the one file
//! excluded from the byte-identical contract. Resume compares the stored
//! config hash and skips any check whose output already exists.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA: &str = "nestlab/1";

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub check: String,
    pub file: String,
    pub millis: u128,
    /// true when the entry was carried over from a previous run by --resume
    pub resumed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub entries: Vec<ManifestEntry>,
    pub total_millis: u128,
}

/// Builder that accumulates entries while a command runs. Each command
/// writes its own `manifest-<command>.json`, so commands sharing an output
/// directory (cascade, then report) do not clobber each other's records.
pub struct ManifestBuilder {
    out_dir: PathBuf,
    command: String,
    config_hash: String,
    seed: u64,
    config: serde_json::Value,
    entries: Vec<ManifestEntry>,
    started: Instant,
    previous: Option<RunManifest>,
}

impl ManifestBuilder {
    pub fn new(cfg: &RunConfig) -> anyhow::Result<Self> {
        fs::create_dir_all(&cfg.out)
            .with_context(|| format!("creating output dir {}", cfg.out.display()))?;
        let previous = if cfg.resume {
            read_manifest(&cfg.out, &cfg.command).ok()
        } else {
            None
        };
        Ok(ManifestBuilder {
            out_dir: cfg.out.clone(),
            command: cfg.command.clone(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            config: serde_json::to_value(cfg).expect("config serializes"),
            entries: Vec::new(),
            started: Instant::now(),
            previous,
        })
    }

    /// Returns true when --resume found a manifest with the same config hash
    /// that already lists `check` with its output file still on disk.
    pub fn can_skip(&self, check: &str) -> bool {
        let Some(prev) = &self.previous else {
            return false;
        };
        if prev.config_hash != self.config_hash {
            return false;
        }
        prev.entries
            .iter()
            .any(|e| e.check == check && self.out_dir.join(&e.file).is_file())
    }

    /// Records a completed check. `file` is relative to the output dir.
    pub fn record(&mut self, check: &str, file: &str, millis: u128, resumed: bool) {
        self.entries.push(ManifestEntry {
            check: check.to_string(),
            file: file.to_string(),
            millis,
            resumed,
        });
    }

    /// Runs `work` unless the check can be resumed, timing it either way.
    pub fn step<F>(&mut self, check: &str, file: &str, work: F) -> anyhow::Result<()>
    where
        F: FnOnce(&Path) -> anyhow::Result<()>,
    {
        if self.can_skip(check) {
            self.record(check, file, 0, true);
            return Ok(());
        }
        let t = Instant::now();
        let path = self.out_dir.join(file);
        work(&path)?;
        self.record(check, file, t.elapsed().as_millis(), false);
        Ok(())
    }

    /// Writes manifest.json. Fails if any recorded file is missing — a
    /// manifest must never reference artifacts that do not exist.
    pub fn finish(self) -> anyhow::Result<RunManifest> {
        for e in &self.entries {
            let p = self.out_dir.join(&e.file);
            if !p.is_file() {
                anyhow::bail!("manifest lists '{}' but it was never written", e.file);
            }
        }
        let m = RunManifest {
            schema: SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.config_hash,
            seed: self.seed,
            config: self.config,
            entries: self.entries,
            total_millis: self.started.elapsed().as_millis(),
        };
        let path = self.out_dir.join(format!("manifest-{}.json", self.command));
        let mut body = serde_json::to_string_pretty(&m).expect("manifest serializes");
        body.push('\n');
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(m)
    }
}

pub fn read_manifest(dir: &Path, command: &str) -> anyhow::Result<RunManifest> {
    let path = dir.join(format!("manifest-{command}.json"));
    let body = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m: RunManifest = serde_json::from_str(&body).context("manifest is not valid JSON")?;
    Ok(m)
}

/// Writes a text artifact and returns it, for callers that also want the
/// bytes (e.g. determinism tests).
pub fn write_text(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}
