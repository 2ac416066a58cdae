//! nestlab command line: construct principal nests, verify distortion
//! bounds, measure saddle-node cascades, sweep parameter ranges, and render
//! report figures. Every run writes deterministic JSON/CSV artifacts plus a
//! manifest; exit codes are 0 (pass), 1 (configuration), 2 (precision
//! exhausted), 3 (a verification verdict failed).

mod commands;
mod config;
mod manifest;
mod svg;

use std::path::PathBuf;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};
use serde::Deserialize;

use commands::{EXIT_CONFIG, EXIT_PRECISION};
use config::{MapSpec, Precision, RunConfig};
use nestlab_core::scalar::{set_mp_precision_bits, Mp, Scalar};

#[derive(Parser, Debug)]
#[command(
    name = "nestlab",
    version,
    about = "numerical laboratory for one-dimensional unimodal interval dynamics"
)]
struct Cli {
    /// map descriptor family:param, e.g. logistic:3.9 or logistic:t3-1e-5
    /// (t3 = the period-3 tangency 1+sqrt(8), evaluated at working precision)
    #[arg(long, global = true)]
    map: Option<String>,

    /// numeric backend: f64, or extN for N decimal digits (e.g. ext50)
    #[arg(long, global = true)]
    precision: Option<String>,

    /// RNG seed; recorded verbatim in every output
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// output directory for reports and the run manifest
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON file supplying defaults for any flag (explicit flags win)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// skip checks an identical previous run already completed
    #[arg(long, global = true)]
    resume: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// construct the principal nest and write per-level reports
    Nest {
        /// nest depth; 0 builds just the starting level
        #[arg(long)]
        depth: Option<usize>,
        /// per-level return-domain scan density (0 = skip scans)
        #[arg(long)]
        scan: Option<usize>,
        /// iteration cap for entry searches
        #[arg(long)]
        entry_cap: Option<usize>,
    },
    /// run distortion-bound checks; JSONL records plus a CSV summary
    Verify {
        /// comma-separated subset of checks (default: all); see --list-checks
        #[arg(long)]
        checks: Option<String>,
        /// print the check catalog and exit
        #[arg(long, default_value_t = false)]
        list_checks: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// derivative-sampling grid density
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        delta0: Option<f64>,
    },
    /// measure a central cascade: gap profile, scaling fit, channel sums
    Cascade {
        /// nest depth cap; 0 picks one from the tangency offset
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        entry_cap: Option<usize>,
    },
    /// classify a parameter range in parallel, one CSV row per parameter
    Sweep {
        /// lo:hi:step over the logistic parameter
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// render SVG figures from a completed run's artifacts
    Report {},
}

/// Optional JSON config file: any subset of the flags, flat.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    map: Option<String>,
    precision: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    depth: Option<usize>,
    scan: Option<usize>,
    entry_cap: Option<usize>,
    grid: Option<usize>,
    samples: Option<usize>,
    n_max: Option<usize>,
    checks: Option<Vec<String>>,
    xi: Option<f64>,
    delta0: Option<f64>,
    range: Option<String>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nestlab: error: {e:#}");
            exit_for_error(&e)
        }
    }
}

/// Precision failures surfacing as errors (rather than recorded verdicts)
/// map to exit 2; everything else that escapes a command is a configuration
/// or construction problem.
fn exit_for_error(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<nestlab_core::Error>() {
            if matches!(core, nestlab_core::Error::Precision(_)) {
                return EXIT_PRECISION;
            }
        }
    }
    EXIT_CONFIG
}

fn parse_range(s: &str) -> anyhow::Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        anyhow::bail!("--range wants lo:hi:step, got '{s}'");
    }
    let lo: f64 = parts[0].parse().context("range lo")?;
    let hi: f64 = parts[1].parse().context("range hi")?;
    let step: f64 = parts[2].parse().context("range step")?;
    Ok((lo, hi, step))
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            serde_json::from_str(&body)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    if let Cmd::Verify {
        list_checks: true, ..
    } = &cli.cmd
    {
        for (id, blurb) in commands::verify::CHECKS {
            println!("{id:22} {blurb}");
        }
        return Ok(0);
    }

    let map_str = cli
        .map
        .or(file.map)
        .unwrap_or_else(|| "logistic:3.9".to_string());
    let map = MapSpec::parse(&map_str)?;
    let seed = cli.seed.or(file.seed).unwrap_or(1);
    let out = cli
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("nestlab-out"));

    // command-specific knobs with their defaults
    let (command, depth, scan, entry_cap, grid, samples, n_max, checks, xi, delta0, range) =
        match &cli.cmd {
            Cmd::Nest {
                depth,
                scan,
                entry_cap,
            } => (
                "nest",
                depth.or(file.depth).unwrap_or(8),
                scan.or(file.scan).unwrap_or(0),
                entry_cap.or(file.entry_cap).unwrap_or(500_000),
                file.grid.unwrap_or(512),
                file.samples.unwrap_or(400),
                file.n_max.unwrap_or(30),
                Vec::new(),
                file.xi.unwrap_or(0.5),
                file.delta0.unwrap_or(0.05),
                None,
            ),
            Cmd::Verify {
                checks,
                samples,
                n_max,
                depth,
                grid,
                xi,
                delta0,
                ..
            } => {
                let selected: Vec<String> = match checks {
                    Some(list) => list
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                    None => file.checks.clone().unwrap_or_default(),
                };
                (
                    "verify",
                    depth.or(file.depth).unwrap_or(6),
                    file.scan.unwrap_or(1_200),
                    file.entry_cap.unwrap_or(500_000),
                    grid.or(file.grid).unwrap_or(512),
                    samples.or(file.samples).unwrap_or(400),
                    n_max.or(file.n_max).unwrap_or(30),
                    selected,
                    xi.or(file.xi).unwrap_or(0.5),
                    delta0.or(file.delta0).unwrap_or(0.05),
                    None,
                )
            }
            Cmd::Cascade {
                depth,
                xi,
                entry_cap,
            } => (
                "cascade",
                depth.or(file.depth).unwrap_or(0),
                0,
                entry_cap.or(file.entry_cap).unwrap_or(2_000_000),
                file.grid.unwrap_or(512),
                file.samples.unwrap_or(400),
                file.n_max.unwrap_or(30),
                Vec::new(),
                xi.or(file.xi).unwrap_or(0.5),
                file.delta0.unwrap_or(0.05),
                None,
            ),
            Cmd::Sweep {
                range,
                depth,
                samples,
                n_max,
            } => {
                let spec = range
                    .clone()
                    .or(file.range.clone())
                    .ok_or_else(|| anyhow::anyhow!("sweep needs --range lo:hi:step"))?;
                (
                    "sweep",
                    depth.or(file.depth).unwrap_or(8),
                    0,
                    file.entry_cap.unwrap_or(100_000),
                    file.grid.unwrap_or(512),
                    samples.or(file.samples).unwrap_or(40),
                    n_max.or(file.n_max).unwrap_or(30),
                    Vec::new(),
                    file.xi.unwrap_or(0.5),
                    file.delta0.unwrap_or(0.05),
                    Some(parse_range(&spec)?),
                )
            }
            Cmd::Report {} => (
                "report",
                file.depth.unwrap_or(8),
                0,
                file.entry_cap.unwrap_or(500_000),
                file.grid.unwrap_or(512),
                file.samples.unwrap_or(400),
                file.n_max.unwrap_or(30),
                Vec::new(),
                file.xi.unwrap_or(0.5),
                file.delta0.unwrap_or(0.05),
                None,
            ),
        };

    // precision: explicit flag wins; the cascade command self-escalates to
    // extended precision when the parameter hugs the tangency too closely
    // for binary64 gaps to resolve
    let explicit = match cli.precision.as_deref().or(file.precision.as_deref()) {
        Some(p) => Some(Precision::parse(p)?),
        None => None,
    };
    let precision = match explicit {
        Some(p) => p,
        None => auto_precision(command, &map),
    };

    let cfg = RunConfig {
        command: command.to_string(),
        map,
        precision: precision.to_string(),
        seed,
        out,
        depth,
        scan,
        entry_cap,
        grid,
        samples,
        n_max,
        checks,
        xi,
        delta0,
        range,
        resume: cli.resume,
    };
    cfg.validate()?;

    match precision {
        Precision::F64 => run_typed::<f64>(&cfg, explicit.is_some()),
        Precision::Ext(d) => {
            set_mp_precision_bits(
                precision.bits().expect("ext precision carries a bit count"),
            );
            let _ = d;
            run_typed::<Mp>(&cfg, explicit.is_some())
        }
    }
}

/// δ = |a − (1+√8)| below 1e-5 makes the deep cascade gaps shrink past what
/// binary64 nest construction resolves, so an unspecified --precision picks
/// an extended backend with ~25 guard digits past the offset's magnitude.
fn auto_precision(command: &str, map: &MapSpec) -> Precision {
    if command != "cascade" {
        return Precision::F64;
    }
    match map.tangency_offset() {
        Some(off) if off < 0.0 && -off < 1e-5 => {
            let digits = (-off).log10().abs().ceil() as u32 + 25;
            Precision::Ext(digits.max(30))
        }
        _ => Precision::F64,
    }
}

fn run_typed<S: Scalar>(cfg: &RunConfig, explicit_precision: bool) -> anyhow::Result<i32> {
    match cfg.command.as_str() {
        "nest" => commands::nest::run::<S>(cfg),
        "verify" => commands::verify::run::<S>(cfg),
        "cascade" => commands::cascade::run::<S>(cfg, explicit_precision),
        "sweep" => commands::sweep::run(cfg),
        "report" => commands::report::run(cfg),
        other => anyhow::bail!("unknown command '{other}'"),
    }
}

#[allow(dead_code)]
fn assert_cli_parses() {
    Cli::command().debug_assert();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("3.5:4.0:0.01").unwrap(), (3.5, 4.0, 0.01));
        assert!(parse_range("3.5:4.0").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn cascade_auto_precision_tracks_the_offset() {
        let near = MapSpec::parse("logistic:t3-1e-8").unwrap();
        match auto_precision("cascade", &near) {
            Precision::Ext(d) => assert!(d >= 30, "digits {d}"),
            p => panic!("expected ext, got {p:?}"),
        }
        let far = MapSpec::parse("logistic:t3-1e-4").unwrap();
        assert_eq!(auto_precision("cascade", &far), Precision::F64);
        // other commands never self-escalate
        assert_eq!(auto_precision("nest", &near), Precision::F64);
    }
}
