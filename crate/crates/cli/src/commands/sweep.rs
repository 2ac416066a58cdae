//! `nestlab sweep`: classify a parameter range, one CSV row per parameter.
//! The work fans out over a thread pool; rows are collected in index order
//! and every random draw is seeded from (run seed, parameter index), so the
//! bytes are identical however the scheduler slices it. A parameter that
//! fails mid-measurement gets its error recorded in its row — the sweep
//! itself never aborts.

use rayon::prelude::*;

use nestlab_core::bounds::verify_main_theorem;
use nestlab_core::map::UnimodalMap;
use nestlab_core::nest::{
    build_nest_with, construct_nice_interval, detect_cascade, Cascade, NestOptions, Termination,
};

use crate::commands::{csv_preamble, task_seed, EXIT_OK};
use crate::config::RunConfig;
use crate::manifest::{write_text, ManifestBuilder};

struct Sample {
    a: f64,
    levels: usize,
    classified: usize,
    termination: String,
    central_run: usize,
    cascade: String,
    cascade_m: usize,
    min_b: f64,
    certified: usize,
    error: String,
}

impl Sample {
    fn failed(a: f64, e: &anyhow::Error) -> Self {
        Sample {
            a,
            levels: 0,
            classified: 0,
            termination: String::new(),
            central_run: 0,
            cascade: String::new(),
            cascade_m: 0,
            min_b: f64::NAN,
            certified: 0,
            // commas would shift the columns of everything downstream
            error: format!("{e:#}").replace(',', ";").replace('\n', " "),
        }
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.a,
            self.levels,
            self.classified,
            self.termination,
            self.central_run,
            self.cascade,
            self.cascade_m,
            self.min_b,
            self.certified,
            self.error
        )
    }
}

fn termination_tag(t: &Termination) -> (String, usize) {
    match t {
        Termination::DepthReached => ("DepthReached".into(), 0),
        Termination::PrecisionExhausted => ("PrecisionExhausted".into(), 0),
        Termination::NonRecurrentOrbit { .. } => ("NonRecurrent".into(), 0),
        Termination::InfiniteCascadeSuspected { run } => ("InfiniteSuspected".into(), *run),
    }
}

fn measure(a: f64, cfg: &RunConfig, index: usize) -> anyhow::Result<Sample> {
    let map = UnimodalMap::logistic(a).map_err(anyhow::Error::new)?;
    let i0 = construct_nice_interval(&map).map_err(anyhow::Error::new)?;
    let nest = build_nest_with(
        &map,
        i0,
        &NestOptions {
            depth: cfg.depth,
            entry_cap: cfg.entry_cap,
            scan: 0,
            scan_cap: cfg.entry_cap,
        },
    )
    .map_err(anyhow::Error::new)?;
    let (termination, central_run) = termination_tag(&nest.termination);
    let (cascade, cascade_m) = match detect_cascade(&nest, 0) {
        Cascade::None => ("none".to_string(), 0),
        Cascade::SaddleNode { m, mixed } => (
            if mixed { "saddle-node-mixed" } else { "saddle-node" }.to_string(),
            m,
        ),
        Cascade::UlamNeumann { m, mixed } => (
            if mixed {
                "ulam-neumann-mixed"
            } else {
                "ulam-neumann"
            }
            .to_string(),
            m,
        ),
    };
    // min measured operator B at the finest constructed scale
    let v = nest.deepest().clone();
    let mt = verify_main_theorem(&map, &v, cfg.samples, cfg.n_max, task_seed(cfg.seed, index))
        .map_err(anyhow::Error::new)?;
    Ok(Sample {
        a,
        levels: nest.levels.len(),
        classified: nest.classified_len(),
        termination,
        central_run,
        cascade,
        cascade_m,
        min_b: mt.min_b,
        certified: mt.certified,
        error: String::new(),
    })
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<i32> {
    let (lo, hi, step) = cfg
        .range
        .ok_or_else(|| anyhow::anyhow!("sweep needs --range lo:hi:step"))?;
    let n = ((hi - lo) / step).round() as usize;
    let params: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();

    let mut mb = ManifestBuilder::new(cfg)?;
    if mb.can_skip("sweep-csv") {
        mb.record("sweep-csv", "sweep.csv", 0, true);
        mb.finish()?;
        return Ok(EXIT_OK);
    }

    let rows: Vec<Sample> = params
        .par_iter()
        .enumerate()
        .map(|(i, &a)| measure(a, cfg, i).unwrap_or_else(|e| Sample::failed(a, &e)))
        .collect();

    let mut csv = csv_preamble(cfg);
    csv.push_str(
        "parameter,levels,classified,termination,central_run,cascade,cascade_m,min_b,certified,error\n",
    );
    for r in &rows {
        csv.push_str(&r.csv_row());
    }
    mb.step("sweep-csv", "sweep.csv", |p| write_text(p, &csv))?;
    mb.finish()?;

    let failures = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!(
        "swept {} parameters ({} failed rows recorded)",
        rows.len(),
        failures
    );
    Ok(EXIT_OK)
}
