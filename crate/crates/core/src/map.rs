//! Built-in unimodal families with analytic derivatives.
//!
//! Two families are provided, both symmetric about c = 1/2 and mapping the
//! boundary of [0,1] into itself:
//! * `Logistic(a)`: f(x) = a x (1-x), a in (1,4], critical order 2
//! * `PowerFamily(alpha, a)`: f(x) = a (1 - |2x-1|^alpha), alpha > 1,
//!   a in (0,1], critical order alpha
//!
//! Derivatives are closed-form; no finite differencing feeds the Schwarzian
//! or the distortion measurements.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Which built-in family a map belongs to, with its binary64 parameters as
/// given by the user. The working-precision copies live in `UnimodalMap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Logistic { a: f64 },
    #[serde(rename = "power")]
    PowerFamily { alpha: f64, a: f64 },
}

/// A unimodal map on [0,1] with a non-flat critical point at 1/2.
#[derive(Debug, Clone)]
pub struct UnimodalMap<S: Scalar> {
    family: Family,
    /// scale parameter in working precision
    a: S,
    /// critical order exponent in working precision (2 for logistic)
    alpha: S,
    /// Hölder exponent assumed for D²f
    smoothness_eta: f64,
}

/// Sampled estimate of sup |D²f(x)-D²f(y)| / |x-y|^eta over a grid.
/// A lower estimate by construction; the grid size is recorded so reports
/// can state what was actually sampled.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub eta: f64,
    pub c_eta: f64,
    pub grid_size: usize,
}

impl<S: Scalar> UnimodalMap<S> {
    /// Logistic family f(x) = a x (1-x). Requires a in (1,4].
    pub fn logistic(a: S) -> Result<Self> {
        let af = a.to_f64();
        if !(af > 1.0 && af <= 4.0) || !af.is_finite() {
            return Err(Error::Param(format!(
                "logistic parameter must lie in (1,4], got {af}"
            )));
        }
        let m = UnimodalMap {
            family: Family::Logistic { a: af },
            a,
            alpha: S::from_f64(2.0),
            smoothness_eta: 1.0,
        };
        m.check_shape()?;
        Ok(m)
    }

    /// Symmetric power family f(x) = a (1 - |2x-1|^alpha).
    /// Requires alpha > 1 and a in (0,1]. D²f is only (alpha-2)-Hölder when
    /// alpha < 3, so the assumed smoothness exponent is min(1, alpha-2)
    /// (clamped away from 0 for 2 < alpha).
    pub fn power(alpha: S, a: S) -> Result<Self> {
        let alf = alpha.to_f64();
        let af = a.to_f64();
        if !(alf > 1.0) || !alf.is_finite() {
            return Err(Error::Param(format!("power exponent must exceed 1, got {alf}")));
        }
        if !(af > 0.0 && af <= 1.0) {
            return Err(Error::Param(format!(
                "power scale must lie in (0,1], got {af}"
            )));
        }
        let eta = if alf >= 3.0 { 1.0 } else { (alf - 2.0).clamp(0.0, 1.0) };
        let m = UnimodalMap {
            family: Family::PowerFamily { alpha: alf, a: af },
            a,
            alpha,
            smoothness_eta: eta,
        };
        m.check_shape()?;
        Ok(m)
    }

    /// Construction-time sanity: endpoints stay on the boundary, the sampled
    /// derivative is positive left of c and negative right of c, Df(c) = 0.
    fn check_shape(&self) -> Result<()> {
        let f0 = self.eval(&S::zero())?.to_f64();
        let f1 = self.eval(&S::one())?.to_f64();
        let tol = 1e-12;
        if f0.abs() > tol && (f0 - 1.0).abs() > tol {
            return Err(Error::Param(format!("f(0) = {f0} is not a boundary point")));
        }
        if f1.abs() > tol && (f1 - 1.0).abs() > tol {
            return Err(Error::Param(format!("f(1) = {f1} is not a boundary point")));
        }
        for i in 1..20 {
            let x = i as f64 / 40.0; // (0, 0.5)
            let d = self.deriv(&S::from_f64(x), 1)?.to_f64();
            if d <= 0.0 {
                return Err(Error::Param(format!("not increasing at {x}: Df = {d}")));
            }
            let d = self.deriv(&S::from_f64(1.0 - x), 1)?.to_f64();
            if d >= 0.0 {
                return Err(Error::Param(format!(
                    "not decreasing at {}: Df = {d}",
                    1.0 - x
                )));
            }
        }
        let dc = self.deriv(&self.critical_point(), 1)?.to_f64();
        if dc.abs() > 1e-12 {
            return Err(Error::Param(format!("Df(c) = {dc}, expected 0")));
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn critical_point(&self) -> S {
        S::from_f64(0.5)
    }

    /// The critical order: f looks like f(c) - const |x-c|^order near c.
    pub fn critical_order(&self) -> f64 {
        self.alpha.to_f64()
    }

    pub fn smoothness_eta(&self) -> f64 {
        self.smoothness_eta
    }

    /// Scale parameter in working precision (the `a` of either family).
    pub fn param(&self) -> &S {
        &self.a
    }

    fn check_domain(&self, x: &S) -> Result<()> {
        let v = x.to_f64();
        // allow a hair of slack for values produced by long pullback chains
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::Domain(v));
        }
        Ok(())
    }

    /// f(x). Errors if x is outside [0,1].
    pub fn eval(&self, x: &S) -> Result<S> {
        self.check_domain(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// f(x) without the domain check; the inner loops use this after their
    /// own interval bookkeeping has established containment.
    pub fn eval_unchecked(&self, x: &S) -> S {
        match self.family {
            Family::Logistic { .. } => {
                // a x (1-x)
                self.a.mul(x).mul(&S::one().sub(x))
            }
            Family::PowerFamily { .. } => {
                // a (1 - |2x-1|^alpha)
                let u = x.add(x).sub(&S::one()).abs();
                let ua = u.powf(self.alpha.to_f64());
                self.a.mul(&S::one().sub(&ua))
            }
        }
    }

    /// Analytic derivative of order 1, 2 or 3.
    ///
    /// For the power family with alpha < order the derivative blows up at c;
    /// evaluation within 1e-9 of c then reports `UnsupportedOrder` rather
    /// than returning a huge garbage value.
    pub fn deriv(&self, x: &S, order: u32) -> Result<S> {
        self.check_domain(x)?;
        if !(1..=3).contains(&order) {
            return Err(Error::Param(format!("derivative order {order} not in 1..=3")));
        }
        match self.family {
            Family::Logistic { .. } => Ok(match order {
                // Df = a(1-2x)
                1 => self.a.mul(&S::one().sub(&x.add(x))),
                // D2f = -2a
                2 => self.a.add(&self.a).neg(),
                _ => S::zero(),
            }),
            Family::PowerFamily { alpha, .. } => {
                let u = x.add(x).sub(&S::one()); // 2x-1, signed
                let uf = u.to_f64();
                if alpha < order as f64 && uf.abs() < 1e-9 {
                    return Err(Error::UnsupportedOrder { order });
                }
                let sgn = if uf < 0.0 { -1.0 } else { 1.0 };
                let al = self.alpha.to_f64();
                Ok(match order {
                    // Df = -2 a alpha |u|^(alpha-1) sgn(u)
                    1 => {
                        let mag = u.abs().powf(al - 1.0);
                        self.a
                            .mul(&self.alpha)
                            .mul(&mag)
                            .mul(&S::from_f64(-2.0 * sgn))
                    }
                    // D2f = -4 a alpha (alpha-1) |u|^(alpha-2)
                    2 => {
                        let mag = u.abs().powf(al - 2.0);
                        self.a
                            .mul(&self.alpha)
                            .mul(&S::from_f64(al - 1.0))
                            .mul(&mag)
                            .mul(&S::from_f64(-4.0))
                    }
                    // D3f = -8 a alpha (alpha-1)(alpha-2) |u|^(alpha-3) sgn(u)
                    _ => {
                        let mag = u.abs().powf(al - 3.0);
                        self.a
                            .mul(&self.alpha)
                            .mul(&S::from_f64((al - 1.0) * (al - 2.0)))
                            .mul(&mag)
                            .mul(&S::from_f64(-8.0 * sgn))
                    }
                })
            }
        }
    }

    /// Schwarzian derivative Sf = D3f/Df - (3/2)(D2f/Df)^2.
    /// Singular at the critical point.
    pub fn schwarzian(&self, x: &S) -> Result<S> {
        let d1 = self.deriv(x, 1)?;
        let scale = self.a.to_f64().abs().max(1.0);
        if d1.to_f64().abs() < 1e-9 * scale {
            return Err(Error::Singular);
        }
        let d2 = self.deriv(x, 2)?;
        let d3 = self.deriv(x, 3)?;
        let r = d2.div(&d1);
        Ok(d3.div(&d1).sub(&r.mul(&r).mul(&S::from_f64(1.5))))
    }

    /// JSON descriptor, e.g. {"family":"logistic","a":3.9,"precision":"f64"}.
    pub fn descriptor(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self.family).expect("family serializes");
        v["precision"] = serde_json::Value::String(S::backend_name());
        v
    }
}

/// Samples sup |D²f(x)-D²f(y)| / |x-y|^eta over all pairs of an
/// equispaced grid (endpoints included, critical point excluded when D² is
/// singular there). Refining the grid by doubling the interior point count
/// keeps earlier sample points, so the estimate is monotone under that
/// refinement scheme.
pub fn estimate_holder_constant<S: Scalar>(
    map: &UnimodalMap<S>,
    eta: f64,
    grid: usize,
) -> Result<HolderEstimate> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Param(format!("eta must lie in (0,1], got {eta}")));
    }
    if grid < 2 {
        return Err(Error::Param("holder grid needs at least 2 points".into()));
    }
    let alpha = map.critical_order();
    let mut xs = Vec::with_capacity(grid);
    let mut d2 = Vec::with_capacity(grid);
    for i in 0..grid {
        let x = i as f64 / (grid - 1) as f64;
        // skip points where D² itself is singular (power family, alpha < 2)
        if alpha < 2.0 && (x - 0.5).abs() < 1e-9 {
            continue;
        }
        match map.deriv(&S::from_f64(x), 2) {
            Ok(v) => {
                xs.push(x);
                d2.push(v.to_f64());
            }
            Err(Error::UnsupportedOrder { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut sup: f64 = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let num = (d2[i] - d2[j]).abs();
            let den = (xs[i] - xs[j]).abs().powf(eta);
            if den > 0.0 {
                sup = sup.max(num / den);
            }
        }
    }
    Ok(HolderEstimate {
        eta,
        c_eta: sup,
        grid_size: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic(a: f64) -> UnimodalMap<f64> {
        UnimodalMap::logistic(a).unwrap()
    }

    #[test]
    fn eval_fixtures() {
        let f = logistic(4.0);
        assert_eq!(f.eval(&0.5).unwrap(), 1.0);
        assert_eq!(f.eval(&0.75).unwrap(), 0.75);
        let f = logistic(3.9);
        assert!((f.eval(&0.5).unwrap() - 0.975).abs() < 1e-15);
    }

    #[test]
    fn eval_domain_error() {
        let f = logistic(4.0);
        assert!(matches!(f.eval(&1.5), Err(Error::Domain(_))));
        assert!(matches!(f.eval(&-0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn deriv_fixtures() {
        let f = logistic(4.0);
        assert_eq!(f.deriv(&0.0, 1).unwrap(), 4.0);
        assert_eq!(f.deriv(&0.3, 2).unwrap(), -8.0);
        assert_eq!(f.deriv(&0.5, 1).unwrap(), 0.0);
        assert_eq!(f.deriv(&0.9, 3).unwrap(), 0.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(UnimodalMap::<f64>::logistic(5.0).is_err());
        assert!(UnimodalMap::<f64>::logistic(1.0).is_err());
        assert!(UnimodalMap::<f64>::power(0.9, 1.0).is_err());
        assert!(UnimodalMap::<f64>::power(2.5, 1.5).is_err());
    }

    #[test]
    fn schwarzian_closed_form() {
        // Sf = -6/(1-2x)^2 for the logistic family, any a
        let f = logistic(4.0);
        assert!((f.schwarzian(&0.0).unwrap() + 6.0).abs() < 1e-12);
        let f = logistic(3.9);
        assert!((f.schwarzian(&0.25).unwrap() + 24.0).abs() < 1e-10);
        assert!(matches!(f.schwarzian(&0.5), Err(Error::Singular)));
        for i in 1..50 {
            let x = i as f64 / 50.0;
            if (x - 0.5).abs() < 1e-3 {
                continue;
            }
            let s = f.schwarzian(&x).unwrap();
            let oracle = -6.0 / (1.0 - 2.0 * x).powi(2);
            assert!((s - oracle).abs() < 1e-9 * oracle.abs(), "x={x}");
            assert!(s < 0.0);
        }
    }

    #[test]
    fn power_schwarzian_negative() {
        // Sg = -2(alpha-1)(alpha+1)/(2x-1)^2 < 0
        let g = UnimodalMap::<f64>::power(2.5, 0.95).unwrap();
        for i in 1..40 {
            let x = i as f64 / 40.0;
            if (x - 0.5).abs() < 0.01 {
                continue;
            }
            let s = g.schwarzian(&x).unwrap();
            let u = 2.0 * x - 1.0;
            let oracle = -2.0 * 1.5 * 3.5 / (u * u);
            assert!((s - oracle).abs() < 1e-8 * oracle.abs(), "x={x} s={s} want {oracle}");
        }
    }

    #[test]
    fn power_unsupported_order_near_c() {
        let g = UnimodalMap::<f64>::power(2.5, 0.95).unwrap();
        assert!(matches!(
            g.deriv(&0.5, 3),
            Err(Error::UnsupportedOrder { order: 3 })
        ));
        // away from c the third derivative exists
        assert!(g.deriv(&0.2, 3).is_ok());
    }

    #[test]
    fn deriv_matches_finite_differences() {
        let f = logistic(3.7);
        let g = UnimodalMap::<f64>::power(2.5, 0.9).unwrap();
        let h = 1e-6;
        for i in 1..1000 {
            let x = 0.001 + 0.998 * (i as f64) / 1000.0;
            for m in [&f, &g] {
                let fd = (m.eval(&(x + h)).unwrap() - m.eval(&(x - h)).unwrap()) / (2.0 * h);
                let an = m.deriv(&x, 1).unwrap();
                let scale = an.abs().max(1e-3);
                assert!((fd - an).abs() / scale < 1e-5, "x={x} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn symmetry_about_c() {
        let f = logistic(3.9);
        let g = UnimodalMap::<f64>::power(2.5, 0.9).unwrap();
        for i in 0..1000 {
            let t = 0.5 * (i as f64 + 0.5) / 1000.0;
            for m in [&f, &g] {
                let l = m.eval(&(0.5 - t)).unwrap();
                let r = m.eval(&(0.5 + t)).unwrap();
                assert!((l - r).abs() < 1e-14, "t={t}");
            }
        }
    }

    #[test]
    fn holder_constant_logistic_is_zero() {
        let f = logistic(4.0);
        let h = estimate_holder_constant(&f, 1.0, 64).unwrap();
        assert_eq!(h.c_eta, 0.0);
    }

    #[test]
    fn holder_constant_power_family() {
        // Exact supremum for alpha=2.5, eta=0.5, scale a:
        // sup |D2(x)-D2(y)|/|x-y|^0.5 = 4 a alpha (alpha-1) 2^0.5
        let a = 1.0;
        let g = UnimodalMap::<f64>::power(2.5, a).unwrap();
        let exact = 4.0 * a * 2.5 * 1.5 * 2f64.powf(0.5);
        // 201- and 1001-point grids are nested (1000 = 5 * 200) and both
        // contain c, where the extremal pairs accumulate.
        let coarse = estimate_holder_constant(&g, 0.5, 201).unwrap();
        let fine = estimate_holder_constant(&g, 0.5, 1001).unwrap();
        assert!(coarse.c_eta > 0.0);
        assert!(coarse.c_eta <= exact * (1.0 + 1e-9));
        assert!(fine.c_eta <= exact * (1.0 + 1e-9));
        // sampled sup approaches the exact one from below
        assert!(fine.c_eta > 0.99 * exact, "fine {} vs exact {exact}", fine.c_eta);
        // monotone under nested refinement
        assert!(fine.c_eta >= coarse.c_eta * (1.0 - 1e-12));
    }

    #[test]
    fn holder_grid_validation() {
        let f = logistic(4.0);
        assert!(estimate_holder_constant(&f, 1.0, 1).is_err());
        assert!(estimate_holder_constant(&f, 0.0, 10).is_err());
        assert!(estimate_holder_constant(&f, 1.5, 10).is_err());
    }

    #[test]
    fn descriptor_shape() {
        let f = logistic(3.9);
        let d = f.descriptor();
        assert_eq!(d["family"], "logistic");
        assert_eq!(d["a"], 3.9);
        assert_eq!(d["precision"], "f64");
    }
}
