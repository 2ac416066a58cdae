//! `nestlab cascade`: build the nest at a near-tangency parameter, detect
//! the central run, fit the gap scaling laws, and run the channel orbit-sum
//! checks. Artifacts: cascade_fit.json plus cascade_gaps.csv (one row per
//! gap with both the naive and the measured-center reflection distances).

use anyhow::anyhow;
use serde_json::json;

use nestlab_core::bounds::yoccoz::{cascade_sum_checks, yoccoz_fit};
use nestlab_core::nest::{
    build_nest_with, construct_nice_interval, detect_cascade, Cascade, NestOptions, Termination,
};
use nestlab_core::scalar::Scalar;
use nestlab_core::Error as CoreError;

use crate::commands::{csv_preamble, pretty, with_header, EXIT_OK, EXIT_PRECISION};
use crate::config::RunConfig;
use crate::manifest::{write_text, ManifestBuilder};

/// Explicit binary64 below this tangency offset cannot resolve the deep
/// gaps at all — the run refuses up front instead of reporting junk.
const F64_DELTA_FLOOR: f64 = 1e-9;

fn estimated_run_length(delta: f64) -> f64 {
    // measured: m ≈ 0.375/√δ for the saddle-node channel
    0.375 / delta.sqrt()
}

pub fn run<S: Scalar>(cfg: &RunConfig, explicit_precision: bool) -> anyhow::Result<i32> {
    let mut mb = ManifestBuilder::new(cfg)?;

    if mb.can_skip("cascade-json") && mb.can_skip("cascade-csv") {
        let body = std::fs::read_to_string(cfg.out.join("cascade_fit.json"))?;
        let v: serde_json::Value = serde_json::from_str(&body)?;
        let was_precision = v.get("error").is_some();
        mb.record("cascade-json", "cascade_fit.json", 0, true);
        mb.record("cascade-csv", "cascade_gaps.csv", 0, true);
        mb.finish()?;
        return Ok(if was_precision { EXIT_PRECISION } else { EXIT_OK });
    }

    let off = cfg.map.tangency_offset();
    let delta = off.filter(|o| *o < 0.0).map(|o| -o);

    // refuse a hopeless binary64 run before burning time on it
    if S::backend_name() == "f64" {
        if let Some(d) = delta {
            if d < F64_DELTA_FLOOR {
                let body = with_header(
                    cfg,
                    json!({
                        "error": format!(
                            "tangency offset {d:.3e} is below what binary64 nest \
                             construction resolves"
                        ),
                        "guidance": "rerun with --precision extN (ext50 is comfortable here), \
                                     or drop --precision to let the tool pick",
                    }),
                );
                mb.step("cascade-json", "cascade_fit.json", |p| {
                    write_text(p, &pretty(&body))
                })?;
                mb.step("cascade-csv", "cascade_gaps.csv", |p| {
                    write_text(p, &(csv_preamble(cfg) + "k,gap_ratio,min_k_mk,dist,scaled\n"))
                })?;
                mb.finish()?;
                eprintln!(
                    "nestlab: offset {d:.3e} below the binary64 floor; \
                     rerun with --precision ext50"
                );
                return Ok(EXIT_PRECISION);
            }
        }
    }

    let map = cfg.map.build::<S>()?;
    let depth = if cfg.depth > 0 {
        cfg.depth
    } else {
        match delta {
            Some(d) => ((estimated_run_length(d) * 1.35) as usize + 40).min(1_500),
            None => 80,
        }
    };
    let i0 = construct_nice_interval(&map).map_err(anyhow::Error::new)?;
    let nest = build_nest_with(
        &map,
        i0,
        &NestOptions {
            depth,
            entry_cap: cfg.entry_cap,
            scan: 0,
            scan_cap: cfg.entry_cap,
        },
    )
    .map_err(anyhow::Error::new)?;

    let mut csv = csv_preamble(cfg);
    csv.push_str("k,gap_ratio,min_k_mk,dist,scaled\n");

    let base = json!({
        "parameter": map.param().to_f64(),
        "tangency_offset": off,
        "depth": depth,
        "precision_auto": !explicit_precision && S::backend_name() != "f64",
        "levels": nest.levels.len(),
        "termination": nest.termination,
    });

    if matches!(nest.termination, Termination::PrecisionExhausted) {
        let mut body = base;
        merge(
            &mut body,
            json!({
                "error": "nest construction ran out of working precision before the cascade ended",
                "guidance": "rerun with more digits (--precision extN)",
            }),
        );
        let body = with_header(cfg, body);
        mb.step("cascade-json", "cascade_fit.json", |p| {
            write_text(p, &pretty(&body))
        })?;
        mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
        mb.finish()?;
        eprintln!("nestlab: precision exhausted at level {}", nest.levels.len());
        return Ok(EXIT_PRECISION);
    }

    let cascade = detect_cascade(&nest, 0);
    let (kind, m, mixed) = match cascade {
        Cascade::None => {
            let mut body = base;
            merge(&mut body, json!({"cascade": "none"}));
            let body = with_header(cfg, body);
            mb.step("cascade-json", "cascade_fit.json", |p| {
                write_text(p, &pretty(&body))
            })?;
            mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
            mb.finish()?;
            println!("no cascade detected at this parameter");
            return Ok(EXIT_OK);
        }
        Cascade::SaddleNode { m, mixed } => ("saddle-node", m, mixed),
        Cascade::UlamNeumann { m, mixed } => ("ulam-neumann", m, mixed),
    };

    let suspected_infinite =
        matches!(nest.termination, Termination::InfiniteCascadeSuspected { .. });

    let mut body = base;
    merge(
        &mut body,
        json!({"cascade": {"kind": kind, "m": m, "mixed": mixed,
                            "suspected_infinite": suspected_infinite}}),
    );

    if suspected_infinite {
        // the run never ended — there is no far side to fit a gap law
        // against, so record the detection and stop cleanly
        merge(
            &mut body,
            json!({"fit": null, "fit_skipped": "central run still open at the stall point"}),
        );
        let body = with_header(cfg, body);
        mb.step("cascade-json", "cascade_fit.json", |p| {
            write_text(p, &pretty(&body))
        })?;
        mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
        mb.finish()?;
        println!("{kind} run of {m} levels, suspected infinite; no finite-cascade fit");
        return Ok(EXIT_OK);
    }

    if m < 8 {
        merge(
            &mut body,
            json!({"fit": null, "fit_skipped": format!("run of {m} levels is too short to fit")}),
        );
        let body = with_header(cfg, body);
        mb.step("cascade-json", "cascade_fit.json", |p| {
            write_text(p, &pretty(&body))
        })?;
        mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
        mb.finish()?;
        println!("{kind} run of {m} levels; too short for a scaling fit");
        return Ok(EXIT_OK);
    }

    let fit = match yoccoz_fit(&map, &nest, 0, m) {
        Ok(f) => f,
        Err(CoreError::Precision(msg)) => {
            merge(
                &mut body,
                json!({
                    "error": format!("gap profile under-resolved: {msg}"),
                    "guidance": "rerun with more digits (--precision extN)",
                }),
            );
            let body = with_header(cfg, body);
            mb.step("cascade-json", "cascade_fit.json", |p| {
                write_text(p, &pretty(&body))
            })?;
            mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
            mb.finish()?;
            eprintln!("nestlab: cascade gaps under-resolved; add digits");
            return Ok(EXIT_PRECISION);
        }
        Err(e) => return Err(anyhow!(e)),
    };

    for (idx, r) in fit.gap_ratios.iter().enumerate() {
        let k = idx + 1;
        let naive = k.min(m - k);
        let dist = k.min((2 * fit.center_k).saturating_sub(k)).max(1);
        let scaled = r * (dist * dist) as f64;
        csv.push_str(&format!("{k},{r},{naive},{dist},{scaled}\n"));
    }

    let mut sums = Vec::new();
    let mut xis = vec![0.0];
    if cfg.xi > 0.0 {
        xis.push(cfg.xi);
    }
    for &xi in &xis {
        match cascade_sum_checks(&map, &nest, 0, m, xi) {
            Ok(s) => sums.push(serde_json::to_value(&s)?),
            Err(CoreError::Precision(msg)) => {
                sums.push(json!({"xi": xi, "error": format!("under-resolved: {msg}")}))
            }
            Err(e) => return Err(anyhow!(e)),
        }
    }

    merge(
        &mut body,
        json!({"fit": serde_json::to_value(&fit)?, "sums": sums}),
    );
    let body = with_header(cfg, body);
    mb.step("cascade-json", "cascade_fit.json", |p| {
        write_text(p, &pretty(&body))
    })?;
    mb.step("cascade-csv", "cascade_gaps.csv", |p| write_text(p, &csv))?;
    mb.finish()?;
    println!(
        "{kind} run of {m} levels: log-log slope {:.3}, sandwich C {:.2}",
        fit.loglog_slope, fit.sandwich_c
    );
    Ok(EXIT_OK)
}

fn merge(into: &mut serde_json::Value, from: serde_json::Value) {
    if let (Some(a), Some(b)) = (into.as_object_mut(), from.as_object()) {
        for (k, v) in b {
            a.insert(k.clone(), v.clone());
        }
    }
}
