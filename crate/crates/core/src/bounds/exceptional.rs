//! Derivative bounds for the exceptional return configuration.
//!
//! When a level passes the [central, high non-central] gate, the first
//! return to I_i carries two wing branches with a fixed point p in the right
//! wing and the interval V = (p', p) between p and its mirror preimage. The
//! useful facts are quantitative: the return expands outside V, its
//! derivative stays bounded on the wings, and the remaining (non-wing)
//! return domains keep definite space inside I_i. This module measures all
//! of them on a grid and reports the verdict next to the numbers.

use serde::Serialize;

use crate::interval::{scaled_neighborhood_factor, Interval};
use crate::map::UnimodalMap;
use crate::nest::{detect_exceptional, return_domains, Exceptional, PrincipalNest};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Measured derivative data for one exceptional level.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalReport {
    pub level: usize,
    pub return_time: usize,
    /// sampled inf |DFˢ| over the wings minus V — expansion outside V
    pub gamma_hat: f64,
    /// sampled sup |DFˢ| over the whole wings
    pub c_hat: f64,
    /// |DFˢ(p)| at the wing fixed point
    pub df_at_p: f64,
    pub v_len: f64,
    /// non-wing, non-central return domains found at this level
    pub outer_domains: usize,
    /// smallest scaled-neighborhood factor among strictly-inside outer
    /// domains; 0.0 when none qualified
    pub min_outer_factor: f64,
    pub grid: usize,
    pub pass: bool,
}

fn iterate_deriv<S: Scalar>(map: &UnimodalMap<S>, x: &S, n: usize) -> Result<S> {
    let mut y = x.clone();
    let mut d = S::one();
    for _ in 0..n {
        d = d.mul(&map.deriv(&y, 1)?);
        y = map.eval_unchecked(&y);
    }
    Ok(d)
}

fn overlaps<S: Scalar>(a: &Interval<S>, b: &Interval<S>) -> bool {
    a.lo().lt(b.hi()) && b.lo().lt(a.hi())
}

/// Runs the derivative checks at level `i` when the exceptional gate is
/// open there; `Ok(None)` means the configuration simply does not apply.
///
/// `grid` is the per-wing sample density; `scan`/`cap` are passed to the
/// return-domain scan that finds the outer domains.
pub fn exceptional_checks<S: Scalar>(
    map: &UnimodalMap<S>,
    nest: &PrincipalNest<S>,
    i: usize,
    grid: usize,
    scan: usize,
    cap: usize,
) -> Result<Option<ExceptionalReport>> {
    if grid == 0 {
        return Err(Error::Param("exceptional grid must be positive".into()));
    }
    let (left, right, v, p) = match detect_exceptional(nest, i)? {
        Exceptional::NotExceptional => return Ok(None),
        Exceptional::Exceptional { left, right, v, p } => (left, right, v, p),
    };
    let s = right.return_time;
    let ii = &nest.levels[i].interval;

    let mut gamma_hat = f64::INFINITY;
    let mut c_hat: f64 = 0.0;
    let n = grid.max(8);
    for wing in [&left.domain, &right.domain] {
        for j in 0..n {
            let frac = S::from_f64((j as f64 + 0.5) / n as f64);
            let x = wing.lo().add(&wing.len().mul(&frac));
            let d = iterate_deriv(map, &x, s)?.abs().to_f64();
            c_hat = c_hat.max(d);
            if !v.contains(&x) {
                gamma_hat = gamma_hat.min(d);
            }
        }
    }
    let df_at_p = iterate_deriv(map, &p, s)?.abs().to_f64();

    let (domains, _) = return_domains(map, ii, scan, cap)?;
    let mut outer_domains = 0usize;
    let mut min_outer_factor = f64::INFINITY;
    for d in &domains {
        if d.is_central || overlaps(&d.domain, &left.domain) || overlaps(&d.domain, &right.domain)
        {
            continue;
        }
        outer_domains += 1;
        let f = scaled_neighborhood_factor(ii, &d.domain);
        if f > 0.0 {
            min_outer_factor = min_outer_factor.min(f);
        }
    }
    if !min_outer_factor.is_finite() {
        min_outer_factor = 0.0;
    }

    let pass = gamma_hat > 1.0
        && df_at_p > 1.0
        && c_hat.is_finite()
        && (outer_domains == 0 || min_outer_factor > 0.0);
    Ok(Some(ExceptionalReport {
        level: i,
        return_time: s,
        gamma_hat,
        c_hat,
        df_at_p,
        v_len: v.len().to_f64(),
        outer_domains,
        min_outer_factor,
        grid: n,
        pass,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nest::{build_nest, construct_nice_interval};

    fn logistic(a: f64) -> UnimodalMap<f64> {
        UnimodalMap::logistic(a).unwrap()
    }

    #[test]
    fn exceptional_level_expands_outside_v() {
        // 3.86 opens the gate at i = 3 (central, central, high non-central)
        let f = logistic(3.86);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        let r = exceptional_checks(&f, &nest, 3, 400, 800, 400_000)
            .unwrap()
            .expect("gate should be open at i = 3");
        assert!(r.gamma_hat > 1.0, "gamma_hat {} not expanding", r.gamma_hat);
        assert!(r.df_at_p > 1.0, "fixed point not repelling: {}", r.df_at_p);
        assert!(
            r.c_hat >= r.gamma_hat,
            "sup {} below inf {}",
            r.c_hat,
            r.gamma_hat
        );
        assert!(r.v_len > 0.0);
        assert!(r.pass, "verdict failed: {r:?}");
        if r.outer_domains > 0 {
            assert!(r.min_outer_factor > 0.0);
        }
    }

    #[test]
    fn closed_gate_reports_none() {
        let f = logistic(3.86);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        assert!(exceptional_checks(&f, &nest, 2, 64, 200, 50_000)
            .unwrap()
            .is_none());

        // 3.82 never opens the gate at any level
        let f = logistic(3.82);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        for i in 0..nest.levels.len() {
            assert!(exceptional_checks(&f, &nest, i, 64, 200, 50_000)
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn zero_grid_is_a_parameter_error() {
        let f = logistic(3.86);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 4).unwrap();
        assert!(matches!(
            exceptional_checks(&f, &nest, 3, 0, 200, 50_000),
            Err(Error::Param(_))
        ));
    }
}
