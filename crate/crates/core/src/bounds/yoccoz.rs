//! Scaling laws inside saddle-node cascades: the min(k, m−k)⁻² law for the
//! nest annuli, the rescaled parabolic channel around the DF = 1 point with
//! its quadratic sandwich, the channel-count law N ~ 1/√ε, and the sum
//! dichotomy that forces the 1+ξ exponent in the cascade estimates.

use serde::Serialize;

use crate::bounds::ls_slope;
use crate::interval::Interval;
use crate::map::UnimodalMap;
use crate::nest::{build_nest, construct_nice_interval, detect_cascade, Cascade, PrincipalNest};
use crate::orbit::{bisect_root, certify_branch, root_tol};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// The rescaled channel data around the near-tangency of the central
/// return branch.
#[derive(Debug, Clone, Serialize)]
pub struct Parabolic {
    /// rescaled point with DF(x₀) = 1
    pub x0: f64,
    pub df_x0: f64,
    /// channel offset |F(x₀) − x₀| in rescaled coordinates
    pub epsilon: f64,
    /// tightest sandwich ε + a(x−x₀)² ≤ σ(F(x)−x) ≤ ε + b(x−x₀)²
    pub a_coef: f64,
    pub b_coef: f64,
    /// nest boundary marks beyond x₀ on the channel side
    pub channel_count: usize,
    pub n_sqrt_eps: f64,
    pub non_parabolic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct YoccozFit {
    pub level: usize,
    pub m: usize,
    /// (|I_{k−1}| − |I_k|)/|I₀| for 1 ≤ k < m, indices relative to `level`
    pub gap_ratios: Vec<f64>,
    /// measured mirror point of the gap profile (index of the smallest
    /// gap): the detected run carries a δ-independent entry transient, so
    /// this sits a few levels past m/2
    pub center_k: usize,
    /// regression of log gap against log of the distance to the nearer
    /// reflection end min(k, 2·center_k − k) over 2 ≤ k ≤ m−2
    pub loglog_slope: f64,
    /// smallest C with 1/C ≤ ratio·dist² ≤ C over the same range
    pub sandwich_c: f64,
    pub parabolic: Parabolic,
}

const SANDWICH_GRID: usize = 1_000;
const NON_PARABOLIC_SPREAD: f64 = 1e3;

/// Fits the cascade scaling laws for the m central levels starting at
/// `level`. Needs the nest to carry levels through `level + m` and m ≥ 8;
/// callers watching deep cascades should have built the nest in extended
/// precision (the gaps shrink like 1/min(k,m−k)²).
pub fn yoccoz_fit<S: Scalar>(
    map: &UnimodalMap<S>,
    nest: &PrincipalNest<S>,
    level: usize,
    m: usize,
) -> Result<YoccozFit> {
    if m < 8 {
        return Err(Error::Param("cascade too short for a scaling fit (m < 8)".into()));
    }
    if nest.levels.len() <= level + m {
        return Err(Error::Param(
            "nest does not cover the requested cascade range".into(),
        ));
    }
    let base_len = nest.levels[level].interval.len();
    let mut gap_ratios = Vec::with_capacity(m - 1);
    for k in 1..m {
        let prev = nest.levels[level + k - 1].interval.len();
        let cur = nest.levels[level + k].interval.len();
        let gap = prev.sub(&cur).div(&base_len).to_f64();
        if !(gap > 0.0) {
            return Err(Error::Precision(format!(
                "gap at k={k} lost to rounding; raise the precision"
            )));
        }
        gap_ratios.push(gap);
    }

    // Both laws are stated against the distance to the nearer end of the
    // cascade, but the detected central run is not symmetric: its first
    // several levels are a δ-independent entry transient (they match across
    // every δ), so the gap profile's true mirror point sits past m/2.
    // Reflecting naively about m/2 folds transient levels onto channel
    // levels and wrecks the right tail; reflecting about the measured
    // minimum recovers the two matching tails.
    let center_k = 1 + gap_ratios
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("gaps are finite"))
        .map(|(i, _)| i)
        .expect("m >= 8 leaves a nonempty gap sequence");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sandwich_c: f64 = 1.0;
    for k in 2..=(m - 2) {
        let mk = k.min((2 * center_k).saturating_sub(k)).max(1);
        let r = gap_ratios[k - 1];
        let scaled = r * (mk * mk) as f64;
        sandwich_c = sandwich_c.max(scaled).max(1.0 / scaled);
        xs.push((mk as f64).ln());
        ys.push(r.ln());
    }
    let loglog_slope = ls_slope(&xs, &ys);

    let parabolic = fit_parabolic(map, nest, level, m)?;
    Ok(YoccozFit {
        level,
        m,
        gap_ratios,
        center_k,
        loglog_slope,
        sandwich_c,
        parabolic,
    })
}

// the central return branch at the cascade base, rescaled to [0,1]
fn fit_parabolic<S: Scalar>(
    map: &UnimodalMap<S>,
    nest: &PrincipalNest<S>,
    level: usize,
    m: usize,
) -> Result<Parabolic> {
    let cd = nest.levels[level]
        .central
        .as_ref()
        .ok_or_else(|| Error::Param("cascade base level has no central return".into()))?;
    let s = cd.return_time;
    let d = &cd.domain;
    let d_lo = d.lo().clone();
    let len = d.len();
    let g = |x: &S| -> S {
        let mut y = x.clone();
        for _ in 0..s {
            y = map.eval_unchecked(&y);
        }
        y
    };
    // rescaled branch and its derivative; the affine conjugacy leaves
    // derivative values unchanged
    let psi = |u: &S| d_lo.add(&len.mul(u));
    let dg = |x: &S| -> Result<S> {
        let mut acc = S::one();
        let mut y = x.clone();
        for _ in 0..s {
            acc = acc.mul(&map.deriv(&y, 1)?);
            y = map.eval_unchecked(&y);
        }
        Ok(acc)
    };

    // DF = 1 points: scan the rescaled domain for sign changes of DF − 1
    // away from the fold, bisect each, keep the one closest to the diagonal
    let cr = map.critical_point().sub(&d_lo).div(&len).to_f64();
    let scan = 1024;
    let mut best: Option<(S, f64)> = None;
    let mut prev: Option<(S, S)> = None;
    for i in 0..=scan {
        let u = S::from_f64(i as f64 / scan as f64 * 0.996 + 0.002);
        let x = psi(&u);
        let val = dg(&x)?.sub(&S::one());
        if let Some((pu, pval)) = prev.take() {
            if (pval < S::zero()) != (val < S::zero()) {
                let root = bisect_root(&pu, &u, &root_tol::<S>(), |uu| {
                    dg(&psi(uu)).expect("derivative defined on the domain").sub(&S::one())
                })?;
                let x_root = psi(&root);
                let miss = g(&x_root).sub(&x_root).abs().div(&len).to_f64();
                if best.as_ref().map_or(true, |(_, b)| miss < *b) {
                    best = Some((root, miss));
                }
            }
        }
        prev = Some((u, val));
    }
    let (x0_u, _) = best.ok_or_else(|| {
        Error::Construction("no DF = 1 point on the rescaled central branch".into())
    })?;
    let x0 = x0_u.to_f64();
    let df_x0 = dg(&psi(&x0_u))?.to_f64();

    // rescaled displacement h(u) = sign · (F(u) − u)
    let f_res = |u: &S| -> S { g(&psi(u)).sub(&d_lo).div(&len) };
    let disp0 = f_res(&x0_u).sub(&x0_u);
    let sigma = if disp0 < S::zero() { -1.0 } else { 1.0 };
    let epsilon = disp0.abs().to_f64();

    // sandwich over a grid on x₀'s side of the fold, reaching at most half
    // the rescaled domain and keeping a collar off the critical point
    let (glo, ghi) = if x0 > cr {
        ((cr + 0.1 * (x0 - cr)).max(x0 - 0.5), (x0 + 0.5).min(0.998))
    } else {
        ((x0 - 0.5).max(0.002), (cr - 0.1 * (cr - x0)).min(x0 + 0.5))
    };
    let mut a_coef = f64::INFINITY;
    let mut b_coef = f64::NEG_INFINITY;
    for i in 0..=SANDWICH_GRID {
        let u = glo + (ghi - glo) * i as f64 / SANDWICH_GRID as f64;
        if (u - x0).abs() < 1e-3 {
            continue;
        }
        let us = S::from_f64(u);
        let h = f_res(&us).sub(&us).to_f64() * sigma;
        let ratio = (h - epsilon) / ((u - x0) * (u - x0));
        a_coef = a_coef.min(ratio);
        b_coef = b_coef.max(ratio);
    }
    let non_parabolic = !(a_coef > 0.0) || b_coef / a_coef > NON_PARABOLIC_SPREAD;

    // channel marks: the rescaled nest endpoints on x₀'s side
    let mut channel_count = 0usize;
    for k in 1..=m {
        let iv = &nest.levels[level + k].interval;
        let mark = if x0 > cr {
            iv.hi().sub(&d_lo).div(&len).to_f64()
        } else {
            iv.lo().sub(&d_lo).div(&len).to_f64()
        };
        let beyond = if x0 > cr { mark > x0 } else { mark < x0 };
        if beyond {
            channel_count += 1;
        }
    }
    Ok(Parabolic {
        x0,
        df_x0,
        epsilon,
        a_coef,
        b_coef,
        channel_count,
        n_sqrt_eps: channel_count as f64 * epsilon.sqrt(),
        non_parabolic,
    })
}

/// Sums of the return-map images of a test interval T̂ threaded through the
/// channel, with and without the 1+ξ exponent.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeSumReport {
    pub m: usize,
    pub xi: f64,
    /// return-map applications before the image left the base level
    pub steps: usize,
    pub sum_plain: f64,
    pub sum_xi: f64,
    pub base_len: f64,
    /// Σ|Fᵏ(T̂)| / |I₀|
    pub realized_plain: f64,
    /// Σ|Fᵏ(T̂)|^{1+ξ} / |I₀|^{1+ξ}
    pub realized_xi: f64,
    pub t_hat: [f64; 2],
}

/// Builds T̂ between the mid-channel and deep-channel nest marks and sums
/// its return-map images until they escape the base interval. With ξ = 0
/// the realized constant grows with the cascade length; a positive ξ tames
/// it — the dichotomy the cascade estimates rest on.
pub fn cascade_sum_checks<S: Scalar>(
    map: &UnimodalMap<S>,
    nest: &PrincipalNest<S>,
    level: usize,
    m: usize,
    xi: f64,
) -> Result<CascadeSumReport> {
    if m < 4 {
        return Err(Error::Param("cascade too short for a sum check".into()));
    }
    if nest.levels.len() <= level + m {
        return Err(Error::Param(
            "nest does not cover the requested cascade range".into(),
        ));
    }
    let cd = nest.levels[level]
        .central
        .as_ref()
        .ok_or_else(|| Error::Param("cascade base level has no central return".into()))?;
    let s = cd.return_time;
    let base = &nest.levels[level].interval;
    let mid = m.div_ceil(2);

    // candidate marks on both sides; the channel side is where the return
    // map moves slowly
    let side = |right: bool| -> Result<Interval<S>> {
        let pick = |k: usize| -> S {
            let iv = &nest.levels[level + k].interval;
            if right {
                iv.hi().clone()
            } else {
                iv.lo().clone()
            }
        };
        Interval::from_endpoints(pick(m - 1), pick(mid))
    };
    let step_size = |iv: &Interval<S>| -> Result<f64> {
        let x = iv.mid();
        let mut y = x.clone();
        for _ in 0..s {
            y = map.eval(&y)?;
        }
        Ok(y.sub(&x).abs().to_f64())
    };
    let right = side(true)?;
    let left = side(false)?;
    let t_hat = if step_size(&right)? <= step_size(&left)? {
        right
    } else {
        left
    };

    let mut cur = t_hat.clone();
    let mut sum_plain = cur.len().to_f64();
    let mut sum_xi = cur.len().to_f64().powf(1.0 + xi);
    let mut steps = 0usize;
    let cap = 4 * m + 16;
    while steps < cap {
        let branch = match certify_branch(map, cur.clone(), s) {
            Ok(b) => b,
            Err(Error::Fold { .. }) => break,
            Err(e) => return Err(e),
        };
        let next = branch.image().clone();
        if !base.contains_interval(&next) {
            break;
        }
        sum_plain += next.len().to_f64();
        sum_xi += next.len().to_f64().powf(1.0 + xi);
        cur = next;
        steps += 1;
    }
    let base_len = base.len().to_f64();
    Ok(CascadeSumReport {
        m,
        xi,
        steps,
        sum_plain,
        sum_xi,
        base_len,
        realized_plain: sum_plain / base_len,
        realized_xi: sum_xi / base_len.powf(1.0 + xi),
        t_hat: t_hat.to_f64_pair(),
    })
}

/// Measured saddle-node cascade length at the base level for the logistic
/// parameter a = (1+√8) − delta, plus the nest it came from.
pub fn measure_sn_cascade(delta: f64, depth_cap: usize) -> Result<(PrincipalNest<f64>, usize)> {
    let a = 1.0 + 8.0_f64.sqrt() - delta;
    let f = UnimodalMap::logistic(a)?;
    let i0 = construct_nice_interval(&f)?;
    let nest = build_nest(&f, i0, depth_cap)?;
    let m = match detect_cascade(&nest, 0) {
        Cascade::SaddleNode { m, .. } => m,
        _ => 0,
    };
    Ok((nest, m))
}

/// Searches the tangency offset δ for a saddle-node cascade of the target
/// length by bisection on the measured length (monotone in δ up to ±1
/// jitter). Returns (a, δ, measured m).
pub fn find_cascade_parameter(
    target_m: usize,
    mut lo_delta: f64,
    mut hi_delta: f64,
    depth_cap: usize,
) -> Result<(f64, f64, usize)> {
    if !(lo_delta > 0.0 && hi_delta > lo_delta) {
        return Err(Error::Param("need 0 < lo_delta < hi_delta".into()));
    }
    let sn = 1.0 + 8.0_f64.sqrt();
    let (_, m_lo) = measure_sn_cascade(lo_delta, depth_cap)?;
    let (_, m_hi) = measure_sn_cascade(hi_delta, depth_cap)?;
    if !(m_hi <= target_m && target_m <= m_lo) {
        return Err(Error::Param(format!(
            "target m={target_m} outside the measured bracket [{m_hi}, {m_lo}]"
        )));
    }
    let mut best = (lo_delta, m_lo);
    for _ in 0..60 {
        let mid = (lo_delta * hi_delta).sqrt();
        let (_, m) = measure_sn_cascade(mid, depth_cap)?;
        let diff = (m as i64 - target_m as i64).unsigned_abs();
        let best_diff = (best.1 as i64 - target_m as i64).unsigned_abs();
        if diff < best_diff {
            best = (mid, m);
        }
        if m == target_m {
            return Ok((sn - mid, mid, m));
        }
        if m > target_m {
            lo_delta = mid;
        } else {
            hi_delta = mid;
        }
        if hi_delta / lo_delta < 1.0 + 1e-12 {
            break;
        }
    }
    Ok((sn - best.0, best.0, best.1))
}
