//! `nestlab nest`: build the principal nest and write nest.json / nest.csv.

use anyhow::anyhow;

use nestlab_core::nest::{build_nest_with, construct_nice_interval, NestOptions, Termination};
use nestlab_core::scalar::Scalar;
use nestlab_core::Error as CoreError;

use crate::commands::{csv_preamble, pretty, with_header, EXIT_OK, EXIT_PRECISION};
use crate::config::RunConfig;
use crate::manifest::{write_text, ManifestBuilder};

pub fn run<S: Scalar>(cfg: &RunConfig) -> anyhow::Result<i32> {
    let mut mb = ManifestBuilder::new(cfg)?;
    let map = cfg.map.build::<S>()?;
    let i0 = construct_nice_interval(&map).map_err(anyhow::Error::new)?;
    let opts = NestOptions {
        depth: cfg.depth,
        entry_cap: cfg.entry_cap,
        scan: cfg.scan,
        scan_cap: cfg.entry_cap,
    };

    let nest = match build_nest_with(&map, i0, &opts) {
        Ok(n) => n,
        Err(CoreError::Precision(msg)) => {
            // precision died before any level came out whole: record the
            // failure itself so the run still leaves an artifact behind
            let body = with_header(
                cfg,
                serde_json::json!({
                    "error": format!("working precision exhausted: {msg}"),
                    "guidance": "rerun with --precision extN (e.g. ext50)",
                    "partial": true,
                }),
            );
            mb.step("nest-json", "nest.json", |p| write_text(p, &pretty(&body)))?;
            mb.finish()?;
            eprintln!("nestlab: precision exhausted while building the nest; see nest.json");
            return Ok(EXIT_PRECISION);
        }
        Err(e) => return Err(anyhow!(e)),
    };

    let exit = if matches!(nest.termination, Termination::PrecisionExhausted) {
        eprintln!(
            "nestlab: nest construction stopped at level {} on precision; \
             rerun with --precision extN for deeper levels",
            nest.levels.len()
        );
        EXIT_PRECISION
    } else {
        EXIT_OK
    };

    let body = with_header(
        cfg,
        serde_json::json!({
            "nest": nest.report_json(),
            "levels": nest.levels.len(),
            "classified": nest.classified_len(),
        }),
    );
    mb.step("nest-json", "nest.json", |p| write_text(p, &pretty(&body)))?;
    let csv = csv_preamble(cfg) + &nest.csv();
    mb.step("nest-csv", "nest.csv", |p| write_text(p, &csv))?;
    mb.finish()?;
    Ok(exit)
}
