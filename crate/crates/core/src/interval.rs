//! Cross-ratio geometry of nested intervals.
//!
//! For an interval T and a strictly interior subinterval J with side
//! components L and R (so T = L ∪ J ∪ R), two cross-ratios are used:
//!
//! ```text
//! B(T,J) = |T||J| / (|L||R|)        A(T,J) = |T||J| / (|L∪J||J∪R|)
//! ```
//!
//! They satisfy A = B/(1+B) identically. A diffeomorphism h distorts them by
//! the operator ratios B(h;T,J) = B(hT,hJ)/B(T,J) and likewise for A; maps
//! with negative Schwarzian have operator-B at least 1 on every monotone
//! branch, which is the hypothesis all the distortion machinery feeds on.

use serde::Serialize;

use crate::orbit::MonotoneBranch;
use crate::map::UnimodalMap;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// An open interval (lo, hi), lo < hi. Endpoints are arbitrary reals: the
/// geometry here is affine-invariant and some test fixtures live outside
/// [0,1]; map evaluation enforces its own domain separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S: Scalar> {
    lo: S,
    hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if !lo.lt(&hi) {
            return Err(Error::Param(format!(
                "interval needs lo < hi, got [{:?}, {:?}]",
                lo, hi
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds the interval from two endpoints in either order.
    pub fn from_endpoints(a: S, b: S) -> Result<Self> {
        if a.lt(&b) {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }

    pub fn lo(&self) -> &S {
        &self.lo
    }

    pub fn hi(&self) -> &S {
        &self.hi
    }

    pub fn len(&self) -> S {
        self.hi.sub(&self.lo)
    }

    pub fn is_empty(&self) -> bool {
        false // lo < hi by construction
    }

    pub fn mid(&self) -> S {
        S::half(&self.lo, &self.hi)
    }

    /// Open containment of a point.
    pub fn contains(&self, x: &S) -> bool {
        self.lo.lt(x) && x.lt(&self.hi)
    }

    /// Closed containment of a point.
    pub fn contains_closed(&self, x: &S) -> bool {
        self.lo.le(x) && x.le(&self.hi)
    }

    /// Closed containment of another interval.
    pub fn contains_interval(&self, other: &Interval<S>) -> bool {
        self.lo.le(&other.lo) && other.hi.le(&self.hi)
    }

    /// Strict containment with both gaps positive.
    pub fn contains_interval_strictly(&self, other: &Interval<S>) -> bool {
        self.lo.lt(&other.lo) && other.hi.lt(&self.hi)
    }

    pub fn intersects(&self, other: &Interval<S>) -> bool {
        self.lo.lt(&other.hi) && other.lo.lt(&self.hi)
    }

    /// Does `x` sit on either endpoint, up to the backend's resolution at
    /// this interval's scale?
    pub fn on_boundary(&self, x: &S, slack: f64) -> bool {
        let tol = self.scale_tol(slack);
        x.sub(&self.lo).abs().le(&tol) || x.sub(&self.hi).abs().le(&tol)
    }

    fn scale_tol(&self, slack: f64) -> S {
        let scale = self
            .lo
            .abs()
            .to_f64()
            .max(self.hi.abs().to_f64())
            .max(1.0);
        S::epsilon().mul(&S::from_f64(slack * scale))
    }

    pub fn to_f64_pair(&self) -> [f64; 2] {
        [self.lo.to_f64(), self.hi.to_f64()]
    }
}

/// Point-value cross-ratio pair. The constructor computes `a` from `b`, so
/// the identity a = b/(1+b) holds for every value of this type.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossRatioPair {
    pub b: f64,
    pub a: f64,
}

impl CrossRatioPair {
    fn from_b(b: f64) -> Self {
        CrossRatioPair { b, a: b / (1.0 + b) }
    }
}

/// Operator (distortion) pair for a branch: B(fⁿ;T,J) and A(fⁿ;T,J).
/// Unlike [`CrossRatioPair`] the two components are independent ratios; the
/// identity relating point values does not apply here (the identity branch
/// gives (1,1)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistortionPair {
    pub b: f64,
    pub a: f64,
}

/// Degeneracy guard: a side component shorter than this fraction of the
/// backend's resolution at the endpoint scale counts as empty. Keeps the
/// |L||R| denominator away from catastrophic cancellation.
fn degeneracy_tol<S: Scalar>(t: &Interval<S>) -> S {
    let scale = t.lo().abs().to_f64().max(t.hi().abs().to_f64()).max(1.0);
    S::epsilon().mul(&S::from_f64(1e-3 * scale))
}

/// B and A for J strictly inside T. Errors with [`Error::Degenerate`] when
/// either side component is below the degeneracy tolerance.
pub fn cross_ratio<S: Scalar>(t: &Interval<S>, j: &Interval<S>) -> Result<CrossRatioPair> {
    let b = cross_ratio_b(t, j)?;
    Ok(CrossRatioPair::from_b(b.to_f64()))
}

/// The B cross-ratio in working precision, from the four endpoint values in
/// one formula: B = (t1-t0)(j1-j0) / ((j0-t0)(t1-j1)).
pub fn cross_ratio_b<S: Scalar>(t: &Interval<S>, j: &Interval<S>) -> Result<S> {
    let l = j.lo().sub(t.lo());
    let r = t.hi().sub(j.hi());
    let tol = degeneracy_tol(t);
    if l.le(&tol) || r.le(&tol) {
        return Err(Error::Degenerate);
    }
    let num = t.len().mul(&j.len());
    Ok(num.div(&l.mul(&r)))
}

/// min(|L|,|R|)/|J|: T is a δ-scaled neighborhood of J iff this exceeds δ.
/// Returns 0 (not an error) when J touches the boundary of T.
pub fn scaled_neighborhood_factor<S: Scalar>(t: &Interval<S>, j: &Interval<S>) -> f64 {
    if !t.contains_interval(j) {
        return 0.0;
    }
    let l = j.lo().sub(t.lo()).to_f64().max(0.0);
    let r = t.hi().sub(j.hi()).to_f64().max(0.0);
    let jl = j.len().to_f64();
    if jl <= 0.0 {
        return 0.0;
    }
    l.min(r) / jl
}

/// Cross-ratio distortion of a certified branch: the pair
/// (B(fⁿ;T,J), A(fⁿ;T,J)) computed from exact endpoint images.
///
/// J must be strictly inside the branch domain. The endpoint images are
/// iterated alongside the certificate's lap itinerary; if the images fold
/// (ordering flips against the branch orientation) the branch was not
/// actually monotone over J and `MonotonicityViolation` is returned.
pub fn branch_distortion<S: Scalar>(
    map: &UnimodalMap<S>,
    branch: &MonotoneBranch<S>,
    j: &Interval<S>,
) -> Result<DistortionPair> {
    let t = branch.domain();
    if !t.contains_interval_strictly(j) {
        return Err(Error::Degenerate);
    }
    if branch.n() == 0 {
        return Ok(DistortionPair { b: 1.0, a: 1.0 });
    }
    let b_before = cross_ratio_b(t, j)?;
    let a_before = point_a(&b_before);

    // iterate the four endpoints; the T images come from the certificate
    let mut jlo = j.lo().clone();
    let mut jhi = j.hi().clone();
    for _ in 0..branch.n() {
        jlo = map.eval_unchecked(&jlo);
        jhi = map.eval_unchecked(&jhi);
    }
    let t_img = branch.image();
    let j_img = Interval::from_endpoints(jlo, jhi)?;
    if !t_img.contains_interval(&j_img) {
        return Err(Error::MonotonicityViolation);
    }
    let b_after = cross_ratio_b(t_img, &j_img)?;
    let a_after = point_a(&b_after);

    Ok(DistortionPair {
        b: b_after.div(&b_before).to_f64(),
        a: a_after.div(&a_before).to_f64(),
    })
}

fn point_a<S: Scalar>(b: &S) -> S {
    b.div(&S::one().add(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn unit_fixture() {
        let p = cross_ratio(&iv(0.0, 1.0), &iv(0.25, 0.75)).unwrap();
        assert!((p.b - 8.0).abs() < 1e-14);
        assert!((p.a - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_when_touching() {
        assert!(matches!(
            cross_ratio(&iv(0.0, 1.0), &iv(0.0, 0.5)),
            Err(Error::Degenerate)
        ));
        assert!(matches!(
            cross_ratio(&iv(0.0, 1.0), &iv(0.5, 1.0)),
            Err(Error::Degenerate)
        ));
    }

    #[test]
    fn affine_invariance() {
        let (t, j) = (iv(0.0, 1.0), iv(0.25, 0.75));
        let base = cross_ratio(&t, &j).unwrap();
        for &(m, c) in &[(2.0, 1.0), (-3.0, 0.2), (0.04, -7.0)] {
            let map = |x: f64| m * x + c;
            let t2 = Interval::from_endpoints(map(0.0), map(1.0)).unwrap();
            let j2 = Interval::from_endpoints(map(0.25), map(0.75)).unwrap();
            let p = cross_ratio(&t2, &j2).unwrap();
            assert!((p.b - base.b).abs() < 1e-12 * base.b);
            assert!((p.a - base.a).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_neighborhood_fixtures() {
        assert!((scaled_neighborhood_factor(&iv(0.0, 1.0), &iv(0.25, 0.75)) - 0.5).abs() < 1e-15);
        assert!((scaled_neighborhood_factor(&iv(0.0, 1.0), &iv(0.4, 0.6)) - 2.0).abs() < 1e-12);
        let v = iv(0.3, 0.7);
        assert_eq!(scaled_neighborhood_factor(&v, &v), 0.0);
        // J outside T entirely
        assert_eq!(scaled_neighborhood_factor(&iv(0.0, 0.5), &iv(0.6, 0.7)), 0.0);
    }

    #[test]
    fn x_squared_oracle() {
        // g(x) = x² on T=(1,2), J=(1.25,1.75): exact rationals
        // B(T,J) = (1 * 0.5)/(0.25 * 0.25) = 8
        // g: images (1,4), (1.5625, 3.0625): B = (3 * 1.5)/(0.5625 * 0.9375) = 128/15
        // operator = (128/15)/8 = 16/15
        let t = iv(1.0, 2.0);
        let j = iv(1.25, 1.75);
        let bt = cross_ratio_b(&t, &j).unwrap();
        let g = |x: f64| x * x;
        let tg = iv(g(1.0), g(2.0));
        let jg = iv(g(1.25), g(1.75));
        let bg = cross_ratio_b(&tg, &jg).unwrap();
        assert!((bt - 8.0).abs() < 1e-14);
        assert!((bg - 128.0 / 15.0).abs() < 1e-13);
        assert!((bg / bt - 16.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn mobius_preserves_cross_ratio() {
        // h(x) = (a x + b)/(c x + d) preserves B for any nested pair
        let h = |x: f64| (2.0 * x + 1.0) / (0.5 * x + 3.0);
        let t = iv(0.1, 0.9);
        let j = iv(0.3, 0.6);
        let before = cross_ratio(&t, &j).unwrap();
        let th = Interval::from_endpoints(h(0.1), h(0.9)).unwrap();
        let jh = Interval::from_endpoints(h(0.3), h(0.6)).unwrap();
        let after = cross_ratio(&th, &jh).unwrap();
        assert!((after.b / before.b - 1.0).abs() < 1e-12);
        assert!((after.a / before.a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_a_of_b() {
        for &b in &[1e-6, 0.1, 1.0, 8.0, 1e9] {
            let p = CrossRatioPair::from_b(b);
            assert!((p.a - b / (1.0 + b)).abs() <= 1e-16 * p.a);
        }
    }
}
