//! Subcommand implementations. Shared conventions: every JSON artifact
//! carries the schema tag, the command, the tool version, the seed, and the
//! full config; CSV artifacts start with a `#` preamble carrying the same
//! identifiers. Wall-clock data never enters these files — it lives in the
//! manifest, which is exempt from the byte-identical contract.

pub mod cascade;
pub mod nest;
pub mod report;
pub mod sweep;
pub mod verify;

use crate::config::RunConfig;
use crate::manifest::SCHEMA;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PRECISION: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

/// Identification block shared by every JSON artifact.
pub(crate) fn run_header(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "schema": SCHEMA,
        "command": cfg.command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "config": cfg,
    })
}

/// Merges the header into a command-specific body (body keys win on
/// collision, which never happens for the reserved header keys).
pub(crate) fn with_header(cfg: &RunConfig, body: serde_json::Value) -> serde_json::Value {
    let mut out = run_header(cfg);
    if let (Some(o), Some(b)) = (out.as_object_mut(), body.as_object()) {
        for (k, v) in b {
            o.insert(k.clone(), v.clone());
        }
    }
    out
}

pub(crate) fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serializes");
    s.push('\n');
    s
}

pub(crate) fn jsonl(records: &[serde_json::Value]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

pub(crate) fn csv_preamble(cfg: &RunConfig) -> String {
    format!(
        "# schema={} command={} tool_version={} seed={} config_hash={}\n",
        SCHEMA,
        cfg.command,
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        cfg.hash()
    )
}

/// Deterministic per-task seed derivation: mixes the run seed with a task
/// index so parallel work stays reproducible regardless of scheduling.
pub(crate) fn task_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index as u64)
}
