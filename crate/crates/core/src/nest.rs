//! Nice intervals, first-return maps, the principal nest.
//!
//! A nice interval V has the property that the forward orbit of its boundary
//! never re-enters V. First-return domains of a nice interval are then
//! pairwise disjoint, each return branch extends monotonically onto V, and
//! pullbacks of V are nested-or-disjoint with V — this is what makes the
//! pullback construction of [`central_domain`] honest. Iterating the central
//! domain produces the principal nest I_0 ⊃ I_1 ⊃ …, whose per-level
//! classification (central/non-central, high/low) drives everything in
//! [`crate::bounds`].
//!
//! Float caveat, documented once here: boundary orbits are computed by
//! iteration, so a root located to tolerance τ drifts like τ·|Df|ᵏ. Niceness
//! checks and forward certificates are therefore only meaningful over
//! horizons of a few dozen iterates unless the boundary orbit is exactly
//! representable (it is for the level-0 interval of the a=4 logistic map).
//! Longer-horizon claims come from structure (pullback stage disjointness),
//! not from long forward orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::interval::{scaled_neighborhood_factor, Interval};
use crate::map::UnimodalMap;
use crate::orbit::{
    bisect_on, bisect_root, certify_branch, first_entry_time, invert_on_lap, root_tol,
    EntryOutcome, Lap,
};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Default iteration budget for entry-time searches.
pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;

/// Horizon used for internal niceness spot checks; kept short because of the
/// boundary-drift caveat in the module docs.
const NICENESS_SPOT_HORIZON: usize = 64;

/// One discovered domain of a first-return (or first-entry) map.
#[derive(Debug, Clone)]
pub struct ReturnDomain<S: Scalar> {
    pub domain: Interval<S>,
    pub return_time: usize,
    pub is_central: bool,
    /// Laps visited before the return. For non-central domains this is the
    /// full itinerary of length `return_time`; for the central domain the
    /// first step folds, so the itinerary holds the `return_time - 1` laps
    /// after the fold.
    pub lap_itinerary: Vec<Lap>,
    /// The larger interval on which the branch extends diffeomorphically
    /// onto the previous-level interval, when it has been computed.
    pub extension: Option<Interval<S>>,
}

/// Whether the critical value of the return lands back inside the next
/// central domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Centrality {
    Central,
    NonCentral,
}

/// High: the image of the central branch covers the critical point (the
/// branch extremum overshoots c). Low: it does not. The test is
/// orientation-aware: the central branch F = f^(s-1) ∘ f has an extremum at
/// c whose type flips with the orientation of the monotone tail, so "which
/// side of c" alone does not determine high/low.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Height {
    High,
    Low,
}

/// Per-level classification of the return F_i.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelClass {
    pub centrality: Centrality,
    pub height: Height,
    /// true when F_i(c) is too close to c or to the boundary of I_{i+1} to
    /// trust the flags; ambiguous levels are excluded from cascade runs
    pub ambiguous: bool,
    /// F_i(c) in binary64, for reports
    pub landing: f64,
}

impl LevelClass {
    pub fn is_central(&self) -> bool {
        self.centrality == Centrality::Central
    }
    pub fn is_high(&self) -> bool {
        self.height == Height::High
    }
}

/// One level of the principal nest.
#[derive(Debug, Clone)]
pub struct NestLevel<S: Scalar> {
    /// I_i
    pub interval: Interval<S>,
    /// I_i^0 = I_{i+1} with its return time; None only on the terminal
    /// level, where no deeper central domain was constructed
    pub central: Option<ReturnDomain<S>>,
    /// discovered return domains when a scan was requested (empty otherwise)
    pub domains: Vec<ReturnDomain<S>>,
    /// fraction of |I_i| covered by `domains`; 0 when no scan ran
    pub coverage: f64,
    pub classification: Option<LevelClass>,
    /// scaled-neighborhood factor of I_i around I_{i+1}
    pub measured_scaling: Option<f64>,
}

/// Why nest construction stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    DepthReached,
    PrecisionExhausted,
    NonRecurrentOrbit { cap: usize, absorbed: Option<f64> },
    /// the construction stalled on consecutive central returns whose
    /// domains are indistinguishable at working precision
    InfiniteCascadeSuspected { run: usize },
}

/// The principal nest of a map over a starting nice interval.
#[derive(Debug, Clone)]
pub struct PrincipalNest<S: Scalar> {
    pub map: UnimodalMap<S>,
    pub levels: Vec<NestLevel<S>>,
    pub termination: Termination,
}

/// Outcome of a boundary-orbit niceness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Niceness {
    Verified { horizon: usize },
    Violated { k: usize },
}

/// Knobs for [`build_nest_with`]. `scan = 0` skips per-level domain scans.
#[derive(Debug, Clone)]
pub struct NestOptions {
    pub depth: usize,
    pub entry_cap: usize,
    pub scan: usize,
    pub scan_cap: usize,
}

impl Default for NestOptions {
    fn default() -> Self {
        NestOptions {
            depth: 12,
            entry_cap: DEFAULT_ORBIT_CAP,
            scan: 0,
            scan_cap: DEFAULT_ORBIT_CAP,
        }
    }
}

/// The level-0 nice interval (p̂, p) bounded by the orientation-reversing
/// fixed point p and its mirror preimage p̂. The boundary orbit is {p}
/// forever, so niceness is exact. For the logistic family p = 1 - 1/a and
/// p̂ = 1/a in closed form; other families locate p by bisection on the
/// decreasing lap.
pub fn construct_nice_interval<S: Scalar>(map: &UnimodalMap<S>) -> Result<Interval<S>> {
    let c = map.critical_point();
    let one = S::one();
    if let crate::map::Family::Logistic { .. } = map.family() {
        let inv_a = one.div(map.param());
        let p = one.sub(&inv_a);
        if p <= c {
            return Err(Error::Construction(
                "no orientation-reversing fixed point: the fixed point sits at or left of the critical point".into(),
            ));
        }
        return Interval::new(inv_a, p);
    }
    // general case: fixed point on the decreasing lap, then its mirror
    let g = |x: &S| map.eval_unchecked(x).sub(x);
    let at_c = g(&c);
    if !(at_c > S::zero()) {
        return Err(Error::Construction(
            "no orientation-reversing fixed point: f(c) <= c".into(),
        ));
    }
    let p = bisect_root(&c, &one, &root_tol::<S>(), g)
        .map_err(|_| Error::Construction("fixed-point bracket on the decreasing lap failed".into()))?;
    if !(map.deriv(&p, 1)? < S::zero()) {
        return Err(Error::Construction(
            "fixed point is not orientation-reversing".into(),
        ));
    }
    let phat = invert_on_lap(map, Lap::Left, &map.eval_unchecked(&p))?;
    Interval::new(phat, p)
}

/// Iterates both boundary points up to `horizon` and reports the first
/// iterate that lands *confidently* inside V, if any.
///
/// Confidence is tracked by a per-endpoint error envelope: the endpoints
/// are only known to root tolerance (they usually come out of a bisection),
/// and each map application multiplies the uncertainty by |Df| along the
/// orbit. A landing counts as a violation only when its depth inside V
/// exceeds the envelope — the exact boundary orbit of a nice interval
/// touches ∂V, and rounding puts the computed value on either side, so
/// shallower landings are boundary contact, not entry. Endpoint orbits
/// whose step shrinks below tolerance are frozen as numerically fixed;
/// endpoints whose envelope outgrows the unit interval stop contributing
/// (no confident claim is possible for them any more).
pub fn verify_niceness<S: Scalar>(
    map: &UnimodalMap<S>,
    v: &Interval<S>,
    horizon: usize,
) -> Result<Niceness> {
    if horizon == 0 {
        return Err(Error::Param("niceness horizon must be at least 1".into()));
    }
    let freeze = root_tol::<S>().mul(&S::from_f64(1e3));
    let ulp = S::epsilon().mul(&S::from_f64(4.0));
    let mut pts = [v.lo().clone(), v.hi().clone()];
    let mut errs = [root_tol::<S>(), root_tol::<S>()];
    let mut done = [false, false];
    for k in 1..=horizon {
        for i in 0..2 {
            if done[i] {
                continue;
            }
            let d1 = map.deriv(&pts[i], 1)?.abs();
            let next = map.eval(&pts[i])?;
            errs[i] = errs[i].mul(&d1).add(&ulp);
            let depth_lo = next.sub(v.lo());
            let depth_hi = v.hi().sub(&next);
            let depth = S::min_of(depth_lo, depth_hi);
            if depth > errs[i].add(&root_tol::<S>()) {
                return Ok(Niceness::Violated { k });
            }
            if next.sub(&pts[i]).abs() < freeze || errs[i] > S::one() {
                done[i] = true;
            }
            pts[i] = next;
        }
        if done[0] && done[1] {
            break;
        }
    }
    Ok(Niceness::Verified { horizon })
}

/// First-return time of the critical orbit into I, with value-style
/// non-recurrence mapped to [`Error::NotFound`].
fn critical_entry_time<S: Scalar>(
    map: &UnimodalMap<S>,
    i: &Interval<S>,
    cap: usize,
) -> Result<usize> {
    let c = map.critical_point();
    match first_entry_time(map, &c, i, cap)? {
        EntryOutcome::Entered(s) => Ok(s),
        EntryOutcome::Absorbed { step, at } => Err(Error::NotFound(format!(
            "critical orbit absorbed by a fixed point at {at} after {step} iterates"
        ))),
        EntryOutcome::CapExhausted { cap } => Err(Error::NotFound(format!(
            "no return within the {cap}-iterate budget"
        ))),
    }
}

/// The central domain I^0 ∋ c of the first-return map to the nice interval
/// I: the first entry time s of the critical orbit is found, ∂I is pulled
/// back s-1 times along the orbit's lap itinerary, and the fold equation
/// f(y) = d closes the two symmetric endpoints around c.
///
/// Every pullback stage is checked to contain the corresponding orbit point
/// and to stay out of I (that is the nested-or-disjoint property niceness
/// buys); a failed check means the arithmetic can no longer separate the
/// scales and surfaces as a precision error.
pub fn central_domain<S: Scalar>(
    map: &UnimodalMap<S>,
    i: &Interval<S>,
    cap: usize,
) -> Result<ReturnDomain<S>> {
    let c = map.critical_point();
    if !i.contains(&c) {
        return Err(Error::Param(
            "central domain requested for an interval not containing the critical point".into(),
        ));
    }
    let s = critical_entry_time(map, i, cap)?;
    let horizon = s.saturating_sub(1).clamp(1, NICENESS_SPOT_HORIZON);
    if let Niceness::Violated { k } = verify_niceness(map, i, horizon)? {
        return Err(Error::NotNice { k });
    }

    // orbit points x_1..x_{s-1} with their laps
    let mut laps = Vec::with_capacity(s.saturating_sub(1));
    let mut orbit = Vec::with_capacity(s.saturating_sub(1));
    let mut y = map.eval(&c)?;
    for _ in 1..s {
        laps.push(if y < c { Lap::Left } else { Lap::Right });
        orbit.push(y.clone());
        y = map.eval(&y)?;
    }

    // pull ∂I back stage by stage; slack for root tolerance at each stage
    let mut u = i.lo().clone();
    let mut v = i.hi().clone();
    for j in (0..laps.len()).rev() {
        u = invert_on_lap(map, laps[j], &u)
            .map_err(|_| Error::Precision(format!("pullback bracket lost at stage {j}")))?;
        v = invert_on_lap(map, laps[j], &v)
            .map_err(|_| Error::Precision(format!("pullback bracket lost at stage {j}")))?;
        let w = Interval::from_endpoints(u.clone(), v.clone())
            .map_err(|_| Error::Precision(format!("pullback stage {j} collapsed")))?;
        let slack = root_tol::<S>().mul(&S::from_f64(10.0));
        let xj = &orbit[j];
        if *xj < w.lo().sub(&slack) || *xj > w.hi().add(&slack) {
            return Err(Error::Precision(format!(
                "pullback stage {j} no longer tracks the critical orbit"
            )));
        }
        // nested-or-disjoint: the stage must stay clear of the open I
        let inside_lo = w.hi().sub(&slack) > *i.lo();
        let inside_hi = w.lo().add(&slack) < *i.hi();
        if inside_lo && inside_hi {
            return Err(Error::Precision(format!(
                "pullback stage {j} overlaps the base interval"
            )));
        }
    }
    let d = Interval::from_endpoints(u, v)
        .map_err(|_| Error::Precision("pullback of the boundary collapsed".into()))?;
    let fc = map.eval(&c)?;
    if !(d.contains(&fc)) {
        return Err(Error::Precision(
            "critical value fell outside the pulled-back boundary interval".into(),
        ));
    }
    // fold closure: both solutions of f(y) = d.lo around the critical point
    let ylo = invert_on_lap(map, Lap::Left, d.lo())
        .map_err(|_| Error::Precision("left fold solution lost".into()))?;
    let yhi = invert_on_lap(map, Lap::Right, d.lo())
        .map_err(|_| Error::Precision("right fold solution lost".into()))?;
    let j = Interval::from_endpoints(ylo, yhi)
        .map_err(|_| Error::Precision("central domain collapsed".into()))?;
    let slack = root_tol::<S>().mul(&S::from_f64(10.0));
    if !j.contains(&c)
        || *j.lo() < i.lo().sub(&slack)
        || *j.hi() > i.hi().add(&slack)
    {
        return Err(Error::Precision(
            "central domain escaped its base interval".into(),
        ));
    }
    Ok(ReturnDomain {
        domain: j,
        return_time: s,
        is_central: true,
        lap_itinerary: laps,
        extension: None,
    })
}

// --- grid-seeded domain discovery ---------------------------------------

/// FNV-1a over the lap bits of an orbit segment; used to compare itineraries
/// without storing them per seed. Deterministic by construction.
fn fnv1a_push(h: u64, bit: bool) -> u64 {
    (h ^ (bit as u64 + 1)).wrapping_mul(0x0000_0100_0000_01b3)
}
const FNV_SEED: u64 = 0xcbf2_9ce4_8422_2325;

/// (entry time, itinerary hash) of the orbit of x into `target`, or None if
/// the orbit is absorbed or exceeds the budget. `budget` is the scan cap or
/// a sharper per-group bound during boundary refinement.
fn entry_signature<S: Scalar>(
    map: &UnimodalMap<S>,
    x: &S,
    target: &Interval<S>,
    budget: usize,
) -> Option<(usize, u64)> {
    let c = map.critical_point();
    let mut h = FNV_SEED;
    let mut y = x.clone();
    for k in 1..=budget {
        h = fnv1a_push(h, y > c);
        let next = map.eval(&y).ok()?;
        if target.contains(&next) {
            return Some((k, h));
        }
        if next == y {
            return None;
        }
        y = next;
    }
    None
}

/// Recomputes the full lap itinerary for a resolved point (used once per
/// merged domain, on a representative interior point).
fn entry_itinerary<S: Scalar>(
    map: &UnimodalMap<S>,
    x: &S,
    target: &Interval<S>,
    budget: usize,
) -> Option<(usize, Vec<Lap>)> {
    let c = map.critical_point();
    let mut laps = Vec::new();
    let mut y = x.clone();
    for k in 1..=budget {
        laps.push(if y < c { Lap::Left } else { Lap::Right });
        let next = map.eval(&y).ok()?;
        if target.contains(&next) {
            return Some((k, laps));
        }
        y = next;
    }
    None
}

/// Grid-seeded discovery of the domains of the first-entry map from
/// `source` into `target` (first-return when the two coincide). Seeds with
/// identical (time, itinerary) signatures merge; domain edges are then
/// sharpened by bisection on signature membership; each non-central domain
/// is certified monotone and onto. Unresolved stretches only lower the
/// coverage figure, they never abort the scan.
pub fn landing_domains<S: Scalar>(
    map: &UnimodalMap<S>,
    source: &Interval<S>,
    target: &Interval<S>,
    scan: usize,
    cap: usize,
) -> Result<(Vec<ReturnDomain<S>>, f64)> {
    if scan == 0 {
        return Err(Error::Param("scan grid must have at least one seed".into()));
    }
    let c = map.critical_point();
    let step = source.len().div(&S::from_f64(scan as f64));
    let seeds: Vec<S> = (0..scan)
        .map(|j| {
            source
                .lo()
                .add(&step.mul(&S::from_f64(j as f64 + 0.5)))
        })
        .collect();
    let sigs: Vec<Option<(usize, u64)>> = seeds
        .par_iter()
        .map(|x| entry_signature(map, x, target, cap))
        .collect();

    // group maximal runs of adjacent seeds with equal signatures
    struct Group {
        first: usize,
        last: usize,
        sig: (usize, u64),
    }
    let mut groups: Vec<Group> = Vec::new();
    for (idx, sig) in sigs.iter().enumerate() {
        match sig {
            None => continue,
            Some(sg) => match groups.last_mut() {
                Some(g) if g.last + 1 == idx && g.sig == *sg => g.last = idx,
                _ => groups.push(Group {
                    first: idx,
                    last: idx,
                    sig: *sg,
                }),
            },
        }
    }

    // sharpen both edges of each group by bisection on signature membership
    let tol = root_tol::<S>();
    let refined: Vec<(Interval<S>, (usize, u64))> = groups
        .par_iter()
        .filter_map(|g| {
            let sig = g.sig;
            let budget = sig.0; // no point walking past the group's own time
            let inside = |x: &S| entry_signature(map, x, target, budget) == Some(sig);
            let left_outer = if g.first == 0 {
                source.lo().clone()
            } else {
                seeds[g.first - 1].clone()
            };
            let right_outer = if g.last + 1 == seeds.len() {
                source.hi().clone()
            } else {
                seeds[g.last + 1].clone()
            };
            // predicates oriented so `true` is on the group side
            let lo = if inside(&left_outer) {
                left_outer
            } else {
                bisect_on(left_outer, seeds[g.first].clone(), &tol, inside)
            };
            let hi = if inside(&right_outer) {
                right_outer
            } else {
                // mirror the bracket so the predicate is false at the hi end
                let flipped = |x: &S| !inside(x);
                bisect_on(seeds[g.last].clone(), right_outer, &tol, flipped)
            };
            let domain = Interval::from_endpoints(lo, hi).ok()?;
            Some((domain, sig))
        })
        .collect();

    // merge the two monotone halves of the central domain: same entry time,
    // edges meeting at the critical point (their hashes differ only in the
    // first lap bit)
    let mut merged: Vec<(Interval<S>, usize)> = Vec::new();
    let meet_tol = root_tol::<S>().mul(&S::from_f64(16.0));
    for (domain, sig) in refined {
        if let Some((prev, t)) = merged.last_mut() {
            if *t == sig.0
                && prev.hi().sub(&c).abs() < meet_tol
                && domain.lo().sub(&c).abs() < meet_tol
            {
                *prev = Interval::from_endpoints(prev.lo().clone(), domain.hi().clone())
                    .expect("merged central halves");
                continue;
            }
        }
        merged.push((domain, sig.0));
    }

    // certify, with one inward nudge on a fold at the rim
    let ten = S::from_f64(10.0);
    let mut out: Vec<ReturnDomain<S>> = Vec::new();
    let mut covered = S::zero();
    for (domain, t) in merged {
        let central = domain.contains(&c);
        let (rt, itin) = match entry_itinerary(map, &domain.mid(), target, t) {
            Some(r) => r,
            None => continue,
        };
        if rt != t {
            continue; // representative disagrees with the group; drop
        }
        let dom = if central {
            domain
        } else {
            match certify_branch(map, domain.clone(), t) {
                Ok(_) => domain,
                Err(_) => {
                    let nudge = tol.mul(&S::from_f64(4.0));
                    let shrunk = Interval::from_endpoints(
                        domain.lo().add(&nudge),
                        domain.hi().sub(&nudge),
                    );
                    match shrunk {
                        Ok(sh) if certify_branch(map, sh.clone(), t).is_ok() => sh,
                        _ => continue,
                    }
                }
            }
        };
        if !central {
            // onto check: endpoint images must land on ∂target within the
            // domain tolerance transported by the branch derivative
            let branch = certify_branch(map, dom.clone(), t).expect("just certified");
            let img = branch.image();
            let d_lo = branch.deriv_at(map, dom.lo())?.abs();
            let d_hi = branch.deriv_at(map, dom.hi())?.abs();
            let amp = S::max_of(d_lo, d_hi).add(&S::one());
            let tol_img = tol.mul(&ten).mul(&amp);
            let lo_ok = img.lo().sub(target.lo()).abs() < tol_img;
            let hi_ok = img.hi().sub(target.hi()).abs() < tol_img;
            if !(lo_ok && hi_ok) {
                continue;
            }
        }
        covered = covered.add(&dom.len());
        out.push(ReturnDomain {
            domain: dom,
            return_time: t,
            is_central: central,
            lap_itinerary: itin,
            extension: None,
        });
    }
    let coverage = covered.div(&source.len()).to_f64();
    Ok((out, coverage))
}

/// First-return domains of the nice interval I, by grid scan. See
/// [`landing_domains`]; the caller is responsible for I being nice.
pub fn return_domains<S: Scalar>(
    map: &UnimodalMap<S>,
    i: &Interval<S>,
    scan: usize,
    cap: usize,
) -> Result<(Vec<ReturnDomain<S>>, f64)> {
    landing_domains(map, i, i, scan, cap)
}

// --- the principal nest ---------------------------------------------------

fn classify<S: Scalar>(
    map: &UnimodalMap<S>,
    cd: &ReturnDomain<S>,
) -> LevelClass {
    let c = map.critical_point();
    let mut xs = c.clone();
    for _ in 0..cd.return_time {
        xs = map.eval_unchecked(&xs);
    }
    let central = if cd.domain.contains(&xs) {
        Centrality::Central
    } else {
        Centrality::NonCentral
    };
    // orientation of the monotone tail f^(s-1): each Right lap reverses
    let right_laps = cd
        .lap_itinerary
        .iter()
        .filter(|l| **l == Lap::Right)
        .count();
    let max_at_c = right_laps % 2 == 0;
    let overshoots = if max_at_c { xs > c } else { xs < c };
    let height = if overshoots { Height::High } else { Height::Low };
    let amb_tol = root_tol::<S>().mul(&S::from_f64(10.0));
    let near_c = xs.sub(&c).abs() < amb_tol;
    let near_edge = xs.sub(cd.domain.lo()).abs() < amb_tol
        || xs.sub(cd.domain.hi()).abs() < amb_tol;
    LevelClass {
        centrality: central,
        height,
        ambiguous: near_c || near_edge,
        landing: xs.to_f64(),
    }
}

/// Builds the principal nest over I0 with default options (no per-level
/// domain scans). `depth` bounds the number of construction steps; the
/// returned nest has at most depth+1 levels.
pub fn build_nest<S: Scalar>(
    map: &UnimodalMap<S>,
    i0: Interval<S>,
    depth: usize,
) -> Result<PrincipalNest<S>> {
    build_nest_with(
        map,
        i0,
        &NestOptions {
            depth,
            ..NestOptions::default()
        },
    )
}

/// Builds the principal nest with explicit options. Dynamic outcomes
/// (non-recurrence, precision loss, cascade stalls) are recorded in the
/// termination field; only invalid inputs error.
pub fn build_nest_with<S: Scalar>(
    map: &UnimodalMap<S>,
    i0: Interval<S>,
    opts: &NestOptions,
) -> Result<PrincipalNest<S>> {
    let mut levels: Vec<NestLevel<S>> = Vec::new();
    let mut cur = i0;
    let mut central_run = 0usize;
    let stall_tol = root_tol::<S>().mul(&S::from_f64(4.0));
    let mut termination = Termination::DepthReached;

    for _ in 0..opts.depth {
        let cd = match central_domain(map, &cur, opts.entry_cap) {
            Ok(cd) => cd,
            Err(Error::NotFound(detail)) => {
                levels.push(terminal_level(cur));
                termination = Termination::NonRecurrentOrbit {
                    cap: opts.entry_cap,
                    absorbed: detail
                        .contains("absorbed")
                        .then(|| parse_absorbed(&detail))
                        .flatten(),
                };
                return Ok(PrincipalNest {
                    map: map.clone(),
                    levels,
                    termination,
                });
            }
            Err(Error::Precision(_)) => {
                levels.push(terminal_level(cur));
                termination = Termination::PrecisionExhausted;
                return Ok(PrincipalNest {
                    map: map.clone(),
                    levels,
                    termination,
                });
            }
            Err(e) => return Err(e),
        };
        let next = cd.domain.clone();
        let cls = classify(map, &cd);
        if cls.is_central() && !cls.ambiguous {
            central_run += 1;
        } else {
            central_run = 0;
        }
        let (domains, coverage) = if opts.scan > 0 {
            landing_domains(map, &cur, &cur, opts.scan, opts.scan_cap)?
        } else {
            (Vec::new(), 0.0)
        };
        let msf = scaled_neighborhood_factor(&cur, &next);
        levels.push(NestLevel {
            interval: cur.clone(),
            central: Some(cd),
            domains,
            coverage,
            classification: Some(cls),
            measured_scaling: Some(msf),
        });

        // stall: the pullback reproduced the current interval to tolerance
        let stalled = next.lo().sub(cur.lo()).abs() < stall_tol
            && next.hi().sub(cur.hi()).abs() < stall_tol;
        if stalled {
            termination = Termination::InfiniteCascadeSuspected { run: central_run };
            return Ok(PrincipalNest {
                map: map.clone(),
                levels,
                termination,
            });
        }
        // precision floor on the next interval's width
        let floor = S::epsilon().mul(&S::from_f64(1e3));
        if next.len() < floor {
            levels.push(terminal_level(next));
            termination = Termination::PrecisionExhausted;
            return Ok(PrincipalNest {
                map: map.clone(),
                levels,
                termination,
            });
        }
        cur = next;
    }
    levels.push(terminal_level(cur));
    Ok(PrincipalNest {
        map: map.clone(),
        levels,
        termination,
    })
}

fn terminal_level<S: Scalar>(interval: Interval<S>) -> NestLevel<S> {
    NestLevel {
        interval,
        central: None,
        domains: Vec::new(),
        coverage: 0.0,
        classification: None,
        measured_scaling: None,
    }
}

fn parse_absorbed(detail: &str) -> Option<f64> {
    // detail format: "... absorbed by a fixed point at <x> after <k> iterates"
    let at = detail.split(" at ").nth(1)?;
    at.split(' ').next()?.parse().ok()
}

impl<S: Scalar> PrincipalNest<S> {
    /// Number of levels that carry a classification (the terminal level
    /// does not).
    pub fn classified_len(&self) -> usize {
        self.levels
            .iter()
            .filter(|l| l.classification.is_some())
            .count()
    }

    /// The deepest interval constructed.
    pub fn deepest(&self) -> &Interval<S> {
        &self.levels.last().expect("nest has at least one level").interval
    }

    pub fn report_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "interval": l.interval.to_f64_pair(),
                    "central_domain": l.central.as_ref().map(|cd| cd.domain.to_f64_pair()),
                    "return_time": l.central.as_ref().map(|cd| cd.return_time),
                    "classification": l.classification,
                    "measured_scaling": l.measured_scaling,
                    "coverage": l.coverage,
                })
            })
            .collect();
        serde_json::json!({
            "map": self.map.descriptor(),
            "levels": levels,
            "termination": self.termination,
        })
    }

    /// One row per level, for plotting.
    pub fn csv(&self) -> String {
        let mut out = String::from(
            "level,lo,hi,width,return_time,central,high,ambiguous,measured_scaling,coverage\n",
        );
        for (i, l) in self.levels.iter().enumerate() {
            let [lo, hi] = l.interval.to_f64_pair();
            let rt = l
                .central
                .as_ref()
                .map(|cd| cd.return_time.to_string())
                .unwrap_or_default();
            let (central, high, amb) = match &l.classification {
                Some(c) => (
                    (c.centrality == Centrality::Central).to_string(),
                    (c.height == Height::High).to_string(),
                    c.ambiguous.to_string(),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            let msf = l.measured_scaling.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{i},{lo},{hi},{},{rt},{central},{high},{amb},{msf},{}\n",
                hi - lo,
                l.coverage
            ));
        }
        out
    }
}

// --- cascade / exceptional / infinite-cascade detection -------------------

/// A maximal run of central returns starting at a level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Cascade {
    None,
    /// central-low run (the saddle-node channel)
    SaddleNode { m: usize, mixed: bool },
    /// central-high run
    UlamNeumann { m: usize, mixed: bool },
}

/// Classifies the maximal central run starting at level i. Ambiguous levels
/// terminate the run (they are excluded from cascade statistics). Mixed
/// high/low runs report the dominant type, ties going to the leading level,
/// with the mixed flag set.
pub fn detect_cascade<S: Scalar>(nest: &PrincipalNest<S>, i: usize) -> Cascade {
    let mut heights: Vec<Height> = Vec::new();
    for level in nest.levels.iter().skip(i) {
        match &level.classification {
            Some(cls) if cls.is_central() && !cls.ambiguous => heights.push(cls.height),
            _ => break,
        }
    }
    if heights.is_empty() {
        return Cascade::None;
    }
    let m = heights.len();
    let highs = heights.iter().filter(|h| **h == Height::High).count();
    let lows = m - highs;
    let mixed = highs > 0 && lows > 0;
    let dominant = match highs.cmp(&lows) {
        std::cmp::Ordering::Greater => Height::High,
        std::cmp::Ordering::Less => Height::Low,
        std::cmp::Ordering::Equal => heights[0],
    };
    match dominant {
        Height::High => Cascade::UlamNeumann { m, mixed },
        Height::Low => Cascade::SaddleNode { m, mixed },
    }
}

/// An exceptional configuration at level i: after a central return at i-2
/// and a high non-central return at i-1, the first return to I_i owns two
/// wing domains adjacent in time to the previous level's branch, and the
/// interval V = (p', p) between the wing fixed point and its mirror.
#[derive(Debug, Clone)]
pub enum Exceptional<S: Scalar> {
    Exceptional {
        left: ReturnDomain<S>,
        right: ReturnDomain<S>,
        v: Interval<S>,
        /// the fixed point of the return in the right wing
        p: S,
    },
    NotExceptional,
}

/// Checks the classification gate [central at i-2, high non-central at i-1]
/// and, when it matches, constructs the wings and V = (p', p).
pub fn detect_exceptional<S: Scalar>(
    nest: &PrincipalNest<S>,
    i: usize,
) -> Result<Exceptional<S>> {
    if i < 2 || i >= nest.levels.len() {
        return Ok(Exceptional::NotExceptional);
    }
    let gate = match (
        &nest.levels[i - 2].classification,
        &nest.levels[i - 1].classification,
    ) {
        (Some(a), Some(b)) => {
            a.is_central()
                && !a.ambiguous
                && !b.is_central()
                && b.is_high()
                && !b.ambiguous
        }
        _ => false,
    };
    if !gate {
        return Ok(Exceptional::NotExceptional);
    }
    let map = &nest.map;
    let c = map.critical_point();
    let ii = &nest.levels[i].interval;
    let s = nest.levels[i - 1]
        .central
        .as_ref()
        .expect("classified level has a central domain")
        .return_time;
    let g = |x: &S| -> S {
        let mut y = x.clone();
        for _ in 0..s {
            y = map.eval_unchecked(&y);
        }
        y
    };
    let tol = root_tol::<S>();
    let wing = |lo: &S, hi: &S| -> Result<Interval<S>> {
        let r1 = bisect_root(lo, hi, &tol, |x| g(x).sub(ii.lo())).map_err(|_| {
            Error::Construction(format!(
                "wing bracket [{}, {}] has no crossing of the lower edge",
                lo.to_f64(),
                hi.to_f64()
            ))
        })?;
        let r2 = bisect_root(lo, hi, &tol, |x| g(x).sub(ii.hi())).map_err(|_| {
            Error::Construction(format!(
                "wing bracket [{}, {}] has no crossing of the upper edge",
                lo.to_f64(),
                hi.to_f64()
            ))
        })?;
        Interval::from_endpoints(r1, r2)
    };
    let wing_l = wing(ii.lo(), &c)?;
    let wing_r = wing(&c, ii.hi())?;
    let p = bisect_root(wing_r.lo(), wing_r.hi(), &tol, |x| g(x).sub(x))
        .map_err(|_| Error::Construction("no fixed point in the right wing".into()))?;
    let pp = bisect_root(wing_l.lo(), wing_l.hi(), &tol, |x| g(x).sub(&p))
        .map_err(|_| Error::Construction("no preimage of p in the left wing".into()))?;
    let v = Interval::from_endpoints(pp, p.clone())?;
    let mk = |w: Interval<S>| -> Result<ReturnDomain<S>> {
        let b = certify_branch(map, w.clone(), s)
            .map_err(|_| Error::Precision("wing failed monotone certification".into()))?;
        Ok(ReturnDomain {
            domain: w,
            return_time: s,
            is_central: false,
            lap_itinerary: b.itinerary().to_vec(),
            extension: None,
        })
    };
    Ok(Exceptional::Exceptional {
        left: mk(wing_l)?,
        right: mk(wing_r)?,
        v,
        p,
    })
}

/// Probe outcome for the all-central-high pattern.
#[derive(Debug, Clone)]
pub enum Probe<S: Scalar> {
    Finite,
    InfiniteSuspected {
        run: usize,
        i00: Interval<S>,
        i_inf: Interval<S>,
        theta: f64,
    },
}

/// When every classified level is a central high return, constructs the
/// fixed points q0 (furthest from c) and p0 (nearest to c) of the deepest
/// central branch, mirrors them through the branch, and measures
/// θ = |I00| / |I∞| for I00 = (p0', p0), I∞ = (q0, q0'). This only ever
/// reports a suspicion — a finite nest cannot certify an infinite cascade.
pub fn infinite_cascade_probe<S: Scalar>(nest: &PrincipalNest<S>) -> Result<Probe<S>> {
    let classed: Vec<&LevelClass> = nest
        .levels
        .iter()
        .filter_map(|l| l.classification.as_ref())
        .collect();
    if classed.is_empty()
        || !classed
            .iter()
            .all(|c| c.is_central() && c.is_high() && !c.ambiguous)
    {
        return Ok(Probe::Finite);
    }
    let run = classed.len();
    let map = &nest.map;
    let c = map.critical_point();
    let last = nest
        .levels
        .iter()
        .rev()
        .find(|l| l.central.is_some())
        .expect("at least one classified level");
    let cd = last.central.as_ref().unwrap();
    let d = &cd.domain;
    let s = cd.return_time;
    let g = |x: &S| -> S {
        let mut y = x.clone();
        for _ in 0..s {
            y = map.eval_unchecked(&y);
        }
        y
    };
    let tol = root_tol::<S>();
    let near = tol.mul(&S::from_f64(16.0));

    // fixed points of the branch inside D: endpoints that are exactly
    // periodic plus interior sign changes on a scan grid
    let mut roots: Vec<S> = Vec::new();
    for e in [d.lo(), d.hi()] {
        if g(e).sub(e).abs() < near {
            roots.push(e.clone());
        }
    }
    let grid = 1024usize;
    let step = d.len().div(&S::from_f64(grid as f64));
    let mut prev_x = d.lo().clone();
    let mut prev_v = g(&prev_x).sub(&prev_x);
    for k in 1..=grid {
        let x = d.lo().add(&step.mul(&S::from_f64(k as f64)));
        let v = g(&x).sub(&x);
        if v.is_sign_negative() != prev_v.is_sign_negative() {
            if let Ok(r) = bisect_root(&prev_x, &x, &tol, |z| g(z).sub(z)) {
                roots.push(r);
            }
        }
        prev_x = x;
        prev_v = v;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| a.sub(b).abs() < near);
    if roots.len() < 2 {
        return Err(Error::Precision(
            "fewer than two fixed points of the central branch resolved".into(),
        ));
    }
    let dist = |x: &S| x.sub(&c).abs();
    let q0 = roots
        .iter()
        .max_by(|a, b| dist(a).partial_cmp(&dist(b)).unwrap())
        .unwrap()
        .clone();
    let p0 = roots
        .iter()
        .min_by(|a, b| dist(a).partial_cmp(&dist(b)).unwrap())
        .unwrap()
        .clone();
    // mirror through the branch on the other side of c
    let endpoint_tol = root_tol::<S>().mul(&S::from_f64(1e2));
    let mirror = |v: &S| -> Result<S> {
        let (lo, hi) = if *v > c {
            (d.lo().clone(), c.clone())
        } else {
            (c.clone(), d.hi().clone())
        };
        // a boundary root mirrors to the opposite boundary, where the
        // sign-change bracket degenerates — catch that case directly
        if g(&lo).sub(v).abs() < endpoint_tol {
            return Ok(lo);
        }
        if g(&hi).sub(v).abs() < endpoint_tol {
            return Ok(hi);
        }
        bisect_root(&lo, &hi, &tol, |x| g(x).sub(v))
            .map_err(|_| Error::Precision("mirror bracket collapsed".into()))
    };
    let p0m = mirror(&p0)?;
    let q0m = mirror(&q0)?;
    let i00 = Interval::from_endpoints(p0m, p0)?;
    let i_inf = Interval::from_endpoints(q0, q0m)?;
    if !i_inf.contains_interval(&i00) {
        return Err(Error::Precision(
            "inner interval escaped the outer fixed-point interval".into(),
        ));
    }
    let theta = i00.len().div(&i_inf.len()).to_f64();
    Ok(Probe::InfiniteSuspected {
        run,
        i00,
        i_inf,
        theta,
    })
}

// --- nice-interval ladder helper ------------------------------------------

/// A nice interval V = (p̂, p) built from the fixed point p of one onto
/// return branch and its mirror p̂ (the other preimage of f(p)). Between
/// returns the orbit of p stays outside the base interval, and the return
/// lands on p itself, so the boundary orbit never enters V.
pub fn nice_interval_from_branch<S: Scalar>(
    map: &UnimodalMap<S>,
    branch: &ReturnDomain<S>,
) -> Result<Interval<S>> {
    if branch.is_central {
        return Err(Error::Param(
            "nice-interval construction needs an onto (non-central) branch".into(),
        ));
    }
    let t = branch.return_time;
    let g = |x: &S| -> S {
        let mut y = x.clone();
        for _ in 0..t {
            y = map.eval_unchecked(&y);
        }
        y
    };
    let tol = root_tol::<S>();
    let p = bisect_root(branch.domain.lo(), branch.domain.hi(), &tol, |x| {
        g(x).sub(x)
    })?;
    let c = map.critical_point();
    let lap = if p > c { Lap::Left } else { Lap::Right };
    let phat = invert_on_lap(map, lap, &map.eval_unchecked(&p))?;
    Interval::from_endpoints(phat, p)
}

/// Scans the supplied branches for the fixed-point interval closest in
/// width to `target_width`. Used to build ladders of nice intervals at
/// controlled scales.
pub fn nice_interval_near_width<S: Scalar>(
    map: &UnimodalMap<S>,
    branches: &[ReturnDomain<S>],
    target_width: f64,
) -> Result<Interval<S>> {
    let mut best: Option<(f64, Interval<S>)> = None;
    for b in branches {
        if b.is_central {
            continue;
        }
        if let Ok(v) = nice_interval_from_branch(map, b) {
            let gap = (v.len().to_f64() - target_width).abs();
            if best.as_ref().map_or(true, |(g, _)| gap < *g) {
                best = Some((gap, v));
            }
        }
    }
    best.map(|(_, v)| v).ok_or_else(|| {
        Error::Construction("no branch yielded a usable nice interval".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic(a: f64) -> UnimodalMap<f64> {
        UnimodalMap::logistic(a).unwrap()
    }

    #[test]
    fn nice_interval_fixtures() {
        let i = construct_nice_interval(&logistic(4.0)).unwrap();
        assert_eq!(i.to_f64_pair(), [0.25, 0.75]);
        let i = construct_nice_interval(&logistic(3.9)).unwrap();
        let [lo, hi] = i.to_f64_pair();
        assert!((lo - 1.0 / 3.9).abs() < 1e-15 && (hi - (1.0 - 1.0 / 3.9)).abs() < 1e-15);
        assert!(matches!(
            construct_nice_interval(&logistic(1.5)),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn niceness_fixtures() {
        let f = logistic(4.0);
        let v = Interval::new(0.25, 0.75).unwrap();
        assert_eq!(
            verify_niceness(&f, &v, 10_000).unwrap(),
            Niceness::Verified { horizon: 10_000 }
        );
        let w = Interval::new(0.2, 0.8).unwrap();
        assert_eq!(
            verify_niceness(&f, &w, 10).unwrap(),
            Niceness::Violated { k: 1 } // f(0.2) = 0.64 lands inside
        );
        assert!(matches!(
            verify_niceness(&f, &v, 0),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn central_domain_at_level_zero() {
        let f = logistic(3.9);
        let i = construct_nice_interval(&f).unwrap();
        let cd = central_domain(&f, &i, DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(cd.return_time, 3);
        assert!(cd.is_central);
        let [lo, hi] = cd.domain.to_f64_pair();
        // symmetric around c and strictly inside I
        assert!((lo + hi - 1.0).abs() < 1e-9, "not symmetric: {lo} {hi}");
        assert!(lo > i.to_f64_pair()[0] && hi < i.to_f64_pair()[1]);
        // forward check: both endpoints land on ∂I after 3 steps
        let mut x = lo;
        for _ in 0..3 {
            x = f.eval(&x).unwrap();
        }
        let [ilo, ihi] = i.to_f64_pair();
        assert!(
            (x - ilo).abs() < 1e-9 || (x - ihi).abs() < 1e-9,
            "endpoint lands at {x}"
        );
    }

    #[test]
    fn central_domain_nonrecurrent() {
        let f = logistic(4.0);
        let i = construct_nice_interval(&f).unwrap();
        assert!(matches!(
            central_domain(&f, &i, 10_000),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn central_domain_rejects_non_nice() {
        let f = logistic(3.9);
        let i = Interval::new(0.2, 0.8).unwrap();
        assert!(matches!(
            central_domain(&f, &i, 10_000),
            Err(Error::NotNice { .. })
        ));
    }

    #[test]
    fn return_domains_level_zero() {
        let f = logistic(3.9);
        let i = construct_nice_interval(&f).unwrap();
        let (domains, coverage) = return_domains(&f, &i, 10_000, 100_000).unwrap();
        assert!(coverage >= 0.99, "coverage {coverage}");
        // pairwise disjoint and sorted
        for w in domains.windows(2) {
            assert!(w[0].domain.hi() <= w[1].domain.lo());
        }
        // the central domain is among them and matches the pullback result
        let cd = central_domain(&f, &i, DEFAULT_ORBIT_CAP).unwrap();
        let central: Vec<_> = domains.iter().filter(|d| d.is_central).collect();
        assert_eq!(central.len(), 1);
        assert_eq!(central[0].return_time, cd.return_time);
        let [a, b] = central[0].domain.to_f64_pair();
        let [ca, cb] = cd.domain.to_f64_pair();
        assert!((a - ca).abs() < 1e-9 && (b - cb).abs() < 1e-9);
        // non-central domains certify; the central one folds at its first step
        for d in &domains {
            let cert = certify_branch(&f, d.domain.clone(), d.return_time);
            if d.is_central {
                assert!(matches!(cert, Err(Error::Fold { k: 0 })));
            } else {
                assert!(cert.is_ok());
            }
        }
    }

    #[test]
    fn scan_rejects_empty_grid() {
        let f = logistic(3.9);
        let i = construct_nice_interval(&f).unwrap();
        assert!(matches!(
            return_domains(&f, &i, 0, 1000),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn nest_fixture_3_9() {
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 6).unwrap();
        assert!(nest.classified_len() >= 3);
        assert!(matches!(
            nest.termination,
            Termination::NonRecurrentOrbit { .. }
        ));
        let cls: Vec<(bool, bool, usize)> = nest
            .levels
            .iter()
            .filter_map(|l| {
                let c = l.classification?;
                Some((
                    c.is_central(),
                    c.is_high(),
                    l.central.as_ref().unwrap().return_time,
                ))
            })
            .collect();
        // regression: non-central high s=3, then non-central low s=5, s=43
        assert_eq!(cls[0], (false, true, 3));
        assert_eq!(cls[1], (false, false, 5));
        assert_eq!(cls[2], (false, false, 43));
        // widths recorded from the construction
        let widths: Vec<f64> = nest
            .levels
            .iter()
            .map(|l| {
                let [lo, hi] = l.interval.to_f64_pair();
                hi - lo
            })
            .collect();
        assert!((widths[0] - 0.4871794871794872).abs() < 1e-12);
        assert!((widths[1] - 0.2166).abs() < 1e-3);
        assert!((widths[2] - 0.0352).abs() < 1e-3);
        assert!(widths[3] < 1e-5);
        // every constructed level is nice and scalings are positive
        for l in &nest.levels[1..] {
            assert_eq!(
                verify_niceness(&f, &l.interval, 32).unwrap(),
                Niceness::Verified { horizon: 32 }
            );
        }
        for l in &nest.levels {
            if let Some(m) = l.measured_scaling {
                assert!(m > 0.0);
            }
        }
    }

    #[test]
    fn nest_depth_zero() {
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0.clone(), 0).unwrap();
        assert_eq!(nest.levels.len(), 1);
        assert!(nest.levels[0].central.is_none());
        assert_eq!(nest.termination, Termination::DepthReached);
        assert_eq!(nest.levels[0].interval.to_f64_pair(), i0.to_f64_pair());
    }

    #[test]
    fn stall_at_renormalizable_parameter() {
        // attracting 2-cycle: the nest stalls on a central-low return
        let f = logistic(3.2);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        assert!(matches!(
            nest.termination,
            Termination::InfiniteCascadeSuspected { .. }
        ));
        let cls = nest.levels[nest.levels.len() - 1]
            .classification
            .expect("stalled level is classified");
        assert!(cls.is_central());
        assert!(!cls.is_high());
        assert!(matches!(
            infinite_cascade_probe(&nest).unwrap(),
            Probe::Finite
        ));
    }

    #[test]
    fn probe_near_the_doubling_accumulation() {
        let f = logistic(3.5699456);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 10).unwrap();
        assert!(matches!(
            nest.termination,
            Termination::InfiniteCascadeSuspected { .. }
        ));
        match infinite_cascade_probe(&nest).unwrap() {
            Probe::InfiniteSuspected {
                run,
                i00,
                i_inf,
                theta,
            } => {
                assert!(run >= 1);
                assert!(theta < 1.0, "theta {theta}");
                assert!(i_inf.contains_interval(&i00));
            }
            Probe::Finite => panic!("expected an infinite-cascade suspicion"),
        }
    }

    #[test]
    fn probe_finite_on_nonrecurrent_nest() {
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 6).unwrap();
        assert!(matches!(
            infinite_cascade_probe(&nest).unwrap(),
            Probe::Finite
        ));
        // depth-0 nest: trivially finite
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 0).unwrap();
        assert!(matches!(
            infinite_cascade_probe(&nest).unwrap(),
            Probe::Finite
        ));
    }

    #[test]
    fn cascade_fixtures() {
        // 3.82: inside the period-3 saddle-node window
        let f = logistic(3.82);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        match detect_cascade(&nest, 0) {
            Cascade::SaddleNode { m, mixed } => {
                assert_eq!(m, 3);
                assert!(!mixed);
            }
            other => panic!("expected a saddle-node run, got {other:?}"),
        }
        // 3.969: high-central run of length 3 starting at level 1
        let f = logistic(3.969);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        assert_eq!(detect_cascade(&nest, 0), Cascade::None);
        match detect_cascade(&nest, 1) {
            Cascade::UlamNeumann { m, mixed } => {
                assert_eq!(m, 3);
                assert!(!mixed);
            }
            other => panic!("expected an Ulam-Neumann run, got {other:?}"),
        }
        // all-non-central nest: None everywhere
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 6).unwrap();
        for i in 0..nest.levels.len() {
            assert_eq!(detect_cascade(&nest, i), Cascade::None);
        }
    }

    #[test]
    fn cascade_mixed_run_labeling() {
        // fabricated nest: the dynamics of the built-in families never
        // produce mixed runs (the return orientation is locked along a
        // cascade), so the labeling path gets a synthetic check
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let mk_level = |height: Height| NestLevel::<f64> {
            interval: i0.clone(),
            central: Some(ReturnDomain {
                domain: Interval::new(0.45, 0.55).unwrap(),
                return_time: 2,
                is_central: true,
                lap_itinerary: vec![Lap::Right],
                extension: None,
            }),
            domains: Vec::new(),
            coverage: 0.0,
            classification: Some(LevelClass {
                centrality: Centrality::Central,
                height,
                ambiguous: false,
                landing: 0.5,
            }),
            measured_scaling: Some(1.0),
        };
        let nest = PrincipalNest {
            map: f.clone(),
            levels: vec![
                mk_level(Height::Low),
                mk_level(Height::High),
                mk_level(Height::Low),
                terminal_level(i0.clone()),
            ],
            termination: Termination::DepthReached,
        };
        match detect_cascade(&nest, 0) {
            Cascade::SaddleNode { m, mixed } => {
                assert_eq!(m, 3);
                assert!(mixed);
            }
            other => panic!("dominant-low mixed run mislabeled: {other:?}"),
        }
        // tie goes to the leading level
        let nest = PrincipalNest {
            map: f.clone(),
            levels: vec![
                mk_level(Height::High),
                mk_level(Height::Low),
                terminal_level(i0.clone()),
            ],
            termination: Termination::DepthReached,
        };
        match detect_cascade(&nest, 0) {
            Cascade::UlamNeumann { m, mixed } => {
                assert_eq!(m, 2);
                assert!(mixed);
            }
            other => panic!("tied mixed run mislabeled: {other:?}"),
        }
    }

    #[test]
    fn exceptional_fixture() {
        // 3.86: two central-high levels, then a high non-central return;
        // the gate [central at i-2, high non-central at i-1] opens at i = 3
        let f = logistic(3.86);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        let cls: Vec<(bool, bool)> = nest
            .levels
            .iter()
            .filter_map(|l| l.classification.map(|c| (c.is_central(), c.is_high())))
            .collect();
        assert!(cls.len() >= 4, "nest too shallow: {cls:?}");
        assert_eq!(cls[0], (true, true));
        assert_eq!(cls[1], (true, true));
        assert_eq!(cls[2], (false, true));
        match detect_exceptional(&nest, 3).unwrap() {
            Exceptional::Exceptional { left, right, v, p } => {
                let ii = &nest.levels[3].interval;
                assert!(ii.contains_interval(&left.domain));
                assert!(ii.contains_interval(&right.domain));
                assert!(left.domain.hi() <= right.domain.lo());
                // V straddles c, sits inside I_i, and is nice
                let c = 0.5;
                assert!(v.contains(&c));
                assert!(ii.contains_interval(&v));
                assert_eq!(
                    verify_niceness(&f, &v, 32).unwrap(),
                    Niceness::Verified { horizon: 32 }
                );
                // p is a genuine fixed point of the s-step return
                let s = right.return_time;
                let mut y = p;
                for _ in 0..s {
                    y = f.eval(&y).unwrap();
                }
                assert!((y - p).abs() < 1e-9);
            }
            Exceptional::NotExceptional => panic!("expected exceptional at i=3"),
        }
    }

    #[test]
    fn exceptional_gate_rejects() {
        // 3.82 runs central-low; the [central, high non-central] gate never
        // opens anywhere in the nest
        let f = logistic(3.82);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 8).unwrap();
        for i in 0..nest.levels.len() {
            assert!(matches!(
                detect_exceptional(&nest, i).unwrap(),
                Exceptional::NotExceptional
            ));
        }
        // indices without enough history are NotExceptional, not errors
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 6).unwrap();
        assert!(matches!(
            detect_exceptional(&nest, 0).unwrap(),
            Exceptional::NotExceptional
        ));
        assert!(matches!(
            detect_exceptional(&nest, 1).unwrap(),
            Exceptional::NotExceptional
        ));
    }

    #[test]
    fn nice_interval_ladder() {
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        // fixed points of level-0 branches sit outside the central domain,
        // so narrow candidates only come from deeper levels — pool them
        let nest = build_nest(&f, i0, 3).unwrap();
        let mut pool = Vec::new();
        for lvl in nest.levels.iter().take(3) {
            let (ds, _) = return_domains(&f, &lvl.interval, 2_000, 200_000).unwrap();
            pool.extend(ds);
        }
        let v = nice_interval_near_width(&f, &pool, 0.05).unwrap();
        assert!(v.contains(&0.5));
        assert!(
            (0.01..0.12).contains(&v.len()),
            "width {} far from the 0.05 target",
            v.len()
        );
        assert_eq!(
            verify_niceness(&f, &v, 32).unwrap(),
            Niceness::Verified { horizon: 32 }
        );
        // ladder: each target half the previous, widths strictly descend
        let mut prev = v.len();
        for k in 1..4 {
            let target = 0.05 / (1 << k) as f64;
            let vk = nice_interval_near_width(&f, &pool, target).unwrap();
            assert!(vk.contains(&0.5));
            assert!(vk.len() < prev, "ladder did not descend at step {k}");
            assert_eq!(
                verify_niceness(&f, &vk, 32).unwrap(),
                Niceness::Verified { horizon: 32 }
            );
            prev = vk.len();
        }
    }

    #[test]
    fn report_serialization_shape() {
        let f = logistic(3.9);
        let i0 = construct_nice_interval(&f).unwrap();
        let nest = build_nest(&f, i0, 4).unwrap();
        let json = nest.report_json();
        assert!(json["levels"].as_array().unwrap().len() >= 3);
        assert!(json["levels"][0]["return_time"].as_u64().is_some());
        let csv = nest.csv();
        assert_eq!(csv.lines().count(), nest.levels.len() + 1);
        assert!(csv.starts_with("level,lo,hi,width"));
    }
}
