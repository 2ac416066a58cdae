//! `nestlab report`: render the two headline figures as static SVG from a
//! completed run's artifacts in the same output directory — the gap scaling
//! fit from cascade_fit.json and the min-B ladder from verify.jsonl.
//! Nothing is recomputed; the figures are views of recorded data.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::Value;

use crate::commands::{EXIT_CONFIG, EXIT_OK};
use crate::config::RunConfig;
use crate::manifest::{write_text, ManifestBuilder};
use crate::svg::Figure;

pub fn run(cfg: &RunConfig) -> anyhow::Result<i32> {
    let mut mb = ManifestBuilder::new(cfg)?;
    let dir = cfg.out.clone();
    let mut made = 0usize;

    if let Some(fig) = yoccoz_figure(&dir)? {
        let svg = fig.render();
        mb.step("fig-yoccoz", "fig_yoccoz.svg", |p| write_text(p, &svg))?;
        made += 1;
    }
    if let Some(fig) = minb_figure(&dir)? {
        let svg = fig.render();
        mb.step("fig-minb", "fig_minb.svg", |p| write_text(p, &svg))?;
        made += 1;
    }

    if made == 0 {
        eprintln!(
            "nestlab: nothing to plot in {} — run `cascade` or `verify` into this \
             directory first",
            dir.display()
        );
        return Ok(EXIT_CONFIG);
    }
    mb.finish()?;
    println!("rendered {made} figure(s) into {}", dir.display());
    Ok(EXIT_OK)
}

/// log gap vs log reflected distance, with the fitted slope drawn through
/// the data mean.
fn yoccoz_figure(dir: &Path) -> anyhow::Result<Option<Figure>> {
    let path = dir.join("cascade_fit.json");
    if !path.is_file() {
        return Ok(None);
    }
    let v: Value = serde_json::from_str(&fs::read_to_string(&path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let Some(fit) = v.get("fit").filter(|f| !f.is_null()) else {
        return Ok(None);
    };
    let gaps = fit["gap_ratios"]
        .as_array()
        .context("fit.gap_ratios missing")?;
    let m = fit["m"].as_u64().context("fit.m missing")? as usize;
    let center_k = fit["center_k"].as_u64().context("fit.center_k missing")? as usize;
    let slope = fit["loglog_slope"].as_f64().unwrap_or(f64::NAN);

    let mut points = Vec::new();
    for (idx, g) in gaps.iter().enumerate() {
        let k = idx + 1;
        if k < 2 || k > m.saturating_sub(2) {
            continue;
        }
        let Some(r) = g.as_f64().filter(|r| *r > 0.0) else {
            continue;
        };
        let dist = k.min((2 * center_k).saturating_sub(k)).max(1);
        points.push(((dist as f64).ln(), r.ln()));
    }
    if points.len() < 2 {
        return Ok(None);
    }
    // line through the centroid with the fitted slope
    let mx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let line = if slope.is_finite() {
        Some((my - slope * mx, slope))
    } else {
        None
    };
    Ok(Some(Figure {
        title: "cascade gap scaling".into(),
        x_label: "ln dist(k)".into(),
        y_label: "ln gap ratio".into(),
        points,
        line,
        note: format!("m={m} center_k={center_k} slope={slope:.3}"),
    }))
}

/// min operator B per ladder scale, against log10 of the scale width.
fn minb_figure(dir: &Path) -> anyhow::Result<Option<Figure>> {
    let path = dir.join("verify.jsonl");
    if !path.is_file() {
        return Ok(None);
    }
    let body = fs::read_to_string(&path)?;
    let ladder = body
        .lines()
        .filter_map(|l| serde_json::from_str::<Value>(l).ok())
        .find(|v| v.get("check").and_then(|c| c.as_str()) == Some("main-theorem"));
    let Some(rec) = ladder else {
        return Ok(None);
    };
    let Some(scales) = rec["detail"]["scales"].as_array() else {
        return Ok(None);
    };
    let mut points = Vec::new();
    for s in scales {
        let (Some(v_len), Some(min_b)) = (s["v_len"].as_f64(), s["min_b"].as_f64()) else {
            continue;
        };
        if v_len > 0.0 && min_b.is_finite() {
            points.push((v_len.log10(), min_b));
        }
    }
    if points.len() < 2 {
        return Ok(None);
    }
    let slope = rec["detail"]["slope"].as_f64();
    Ok(Some(Figure {
        title: "min operator B across scales".into(),
        x_label: "log10 |V|".into(),
        y_label: "min B".into(),
        points,
        line: None,
        note: match slope {
            Some(s) => format!("log-gap slope {s:.3}"),
            None => "saturated at the clamp".into(),
        },
    }))
}
