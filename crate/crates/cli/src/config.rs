//! Run configuration: CLI flags resolved into a serializable record whose
//! hash identifies the run. Everything that can influence an output byte
//! lives here; wall-clock data stays out (it goes in the manifest only).

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use nestlab_core::map::UnimodalMap;
use nestlab_core::scalar::{bits_for_decimal_digits, Scalar};

/// Numeric backend selection. `ext50` means 50 decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Precision {
    F64,
    Ext(u32),
}

impl Precision {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        if s == "f64" {
            return Ok(Precision::F64);
        }
        if let Some(digits) = s.strip_prefix("ext") {
            let d: u32 = digits
                .parse()
                .map_err(|_| anyhow!("precision '{s}': expected f64 or extN (e.g. ext50)"))?;
            if !(10..=4000).contains(&d) {
                bail!("precision '{s}': digit count must be in 10..=4000");
            }
            return Ok(Precision::Ext(d));
        }
        bail!("precision '{s}': expected f64 or extN (e.g. ext50)")
    }

    pub fn bits(self) -> Option<u32> {
        match self {
            Precision::F64 => None,
            Precision::Ext(d) => Some(bits_for_decimal_digits(d)),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::F64 => write!(f, "f64"),
            Precision::Ext(d) => write!(f, "ext{d}"),
        }
    }
}

/// Parsed `--map family:param` descriptor. The parameter is kept verbatim
/// so extended-precision runs can evaluate it at full precision instead of
/// going through a rounded f64.
#[derive(Debug, Clone, Serialize)]
pub struct MapSpec {
    pub family: String,
    /// verbatim parameter expression, e.g. "3.9" or "t3-1e-8"
    pub param: String,
    /// critical order for the power family (unused for logistic)
    pub alpha: Option<String>,
}

impl MapSpec {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        let mut parts = s.split(':');
        let family = parts
            .next()
            .filter(|f| !f.is_empty())
            .ok_or_else(|| anyhow!("--map needs family:param, got '{s}'"))?
            .to_string();
        match family.as_str() {
            "logistic" => {
                let param = parts
                    .next()
                    .ok_or_else(|| anyhow!("--map logistic needs a parameter: logistic:3.9"))?
                    .to_string();
                if parts.next().is_some() {
                    bail!("--map logistic takes one parameter, got '{s}'");
                }
                Ok(MapSpec {
                    family,
                    param,
                    alpha: None,
                })
            }
            "power" => {
                let alpha = parts
                    .next()
                    .ok_or_else(|| anyhow!("--map power needs power:alpha:param"))?
                    .to_string();
                let param = parts
                    .next()
                    .ok_or_else(|| anyhow!("--map power needs power:alpha:param"))?
                    .to_string();
                Ok(MapSpec {
                    family,
                    param,
                    alpha: Some(alpha),
                })
            }
            other => bail!("unknown map family '{other}' (expected logistic or power)"),
        }
    }

    /// Builds the map in the scalar backend, evaluating the parameter
    /// expression at backend precision.
    pub fn build<S: Scalar>(&self) -> anyhow::Result<UnimodalMap<S>> {
        let a = eval_param_expr::<S>(&self.param)
            .with_context(|| format!("parameter '{}'", self.param))?;
        match self.family.as_str() {
            "logistic" => UnimodalMap::logistic(a).map_err(|e| anyhow!("{e}")),
            "power" => {
                let alpha = eval_param_expr::<S>(
                    self.alpha.as_deref().expect("power family parsed with alpha"),
                )?;
                UnimodalMap::power(alpha, a).map_err(|e| anyhow!("{e}"))
            }
            other => bail!("unknown map family '{other}'"),
        }
    }

    /// The parameter's offset from the period-3 tangency 1+√8, in f64.
    /// Meaningful only for the logistic family; used by the precision guard.
    pub fn tangency_offset(&self) -> Option<f64> {
        if self.family != "logistic" {
            return None;
        }
        let a = eval_param_expr::<f64>(&self.param).ok()?;
        Some(a - (1.0 + 8.0_f64.sqrt()))
    }
}

/// Parameter expressions: a plain decimal literal, or `t3`, `t3+LIT`,
/// `t3-LIT` anchored at the period-3 tangency 1+√8. The tangency is
/// computed in the active backend so `t3-1e-10` at ext precision really is
/// 1e-10 below it, not whatever f64 rounding leaves.
pub fn eval_param_expr<S: Scalar>(expr: &str) -> anyhow::Result<S> {
    let expr = expr.trim();
    if let Some(rest) = expr.strip_prefix("t3") {
        let base = S::one().add(&S::from_f64(8.0).sqrt());
        if rest.is_empty() {
            return Ok(base);
        }
        let (sign, lit) = match rest.split_at(1) {
            ("+", l) => (1.0, l),
            ("-", l) => (-1.0, l),
            _ => bail!("expected t3, t3+LIT or t3-LIT, got '{expr}'"),
        };
        let off = S::parse(lit).ok_or_else(|| anyhow!("bad offset literal '{lit}'"))?;
        return Ok(if sign > 0.0 {
            base.add(&off)
        } else {
            base.sub(&off)
        });
    }
    S::parse(expr).ok_or_else(|| anyhow!("bad numeric literal '{expr}'"))
}

/// Everything that determines the run's output bytes. Serialized into every
/// report header and hashed for the manifest / resume logic. The output
/// directory and the resume flag are deliberately not serialized: neither
/// changes a single output byte, and hashing them would break both resume
/// (`run; run --resume` must agree) and cross-directory determinism checks.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub map: MapSpec,
    pub precision: String,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    pub depth: usize,
    pub scan: usize,
    pub entry_cap: usize,
    pub grid: usize,
    pub samples: usize,
    pub n_max: usize,
    pub checks: Vec<String>,
    pub xi: f64,
    pub delta0: f64,
    /// sweep range (lo, hi, step); empty elsewhere
    pub range: Option<(f64, f64, f64)>,
    #[serde(skip)]
    pub resume: bool,
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.entry_cap == 0 {
            bail!("--entry-cap must be positive");
        }
        if self.grid == 0 {
            bail!("--grid must be positive");
        }
        if self.samples == 0 {
            bail!("--samples must be positive");
        }
        if !(self.xi >= 0.0) {
            bail!("--xi must be non-negative");
        }
        if !(self.delta0 > 0.0) {
            bail!("--delta0 must be positive");
        }
        if let Some((lo, hi, step)) = self.range {
            if !(lo > 1.0 && hi <= 4.0 && lo <= hi) {
                bail!("--range must satisfy 1 < lo <= hi <= 4");
            }
            if !(step > 0.0) {
                bail!("--range step must be positive");
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON of the config. Field order is the
    /// struct order, so the hash is deterministic across runs.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let out = h.finalize();
        let mut s = String::with_capacity(64);
        for b in out {
            use std::fmt::Write;
            write!(s, "{b:02x}").expect("hex write");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_spec_forms() {
        let m = MapSpec::parse("logistic:3.9").unwrap();
        assert_eq!(m.family, "logistic");
        assert_eq!(m.param, "3.9");
        let m = MapSpec::parse("power:2.0:3.7").unwrap();
        assert_eq!(m.alpha.as_deref(), Some("2.0"));
        assert!(MapSpec::parse("logistic").is_err());
        assert!(MapSpec::parse("zeta:3.9").is_err());
    }

    #[test]
    fn tangency_expressions() {
        let t3 = 1.0 + 8.0_f64.sqrt();
        let a: f64 = eval_param_expr("t3").unwrap();
        assert_eq!(a, t3);
        let a: f64 = eval_param_expr("t3-1e-5").unwrap();
        assert!((a - (t3 - 1e-5)).abs() < 1e-18);
        assert!(eval_param_expr::<f64>("t3*2").is_err());
        assert!(eval_param_expr::<f64>("abc").is_err());
    }

    #[test]
    fn precision_forms() {
        assert_eq!(Precision::parse("f64").unwrap(), Precision::F64);
        assert_eq!(Precision::parse("ext50").unwrap(), Precision::Ext(50));
        assert!(Precision::parse("ext4").is_err());
        assert!(Precision::parse("double").is_err());
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let mk = |seed| RunConfig {
            command: "nest".into(),
            map: MapSpec::parse("logistic:3.9").unwrap(),
            precision: "f64".into(),
            seed,
            out: PathBuf::from("/tmp/x"),
            depth: 4,
            scan: 0,
            entry_cap: 1000,
            grid: 10_000,
            samples: 100,
            n_max: 30,
            checks: vec![],
            xi: 0.5,
            delta0: 0.05,
            range: None,
            resume: false,
        };
        assert_eq!(mk(7).hash(), mk(7).hash());
        assert_ne!(mk(7).hash(), mk(8).hash());
    }
}
