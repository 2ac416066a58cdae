//! Numerical laboratory for one-dimensional unimodal interval dynamics.
//!
//! The crate builds first-return maps and principal nests for concrete
//! unimodal maps on [0,1], measures cross-ratio distortion along certified
//! monotone branches, and fits the scaling laws that show up around
//! saddle-node and period-doubling cascades. Everything is computed either
//! in binary64 or in a configurable extended-precision backend.
//!
//! Layering, bottom up:
//! * [`scalar`] - the arithmetic backend abstraction (f64 or big floats)
//! * [`map`] - the built-in unimodal families with analytic derivatives
//! * [`interval`] - cross-ratio geometry of nested subintervals
//! * [`orbit`] - orbits, branch certification, periodic points, preimages
//! * [`nest`] - nice intervals, return domains, the principal nest
//! * [`bounds`] - distortion-bound checks, block sums, cascade scaling fits

pub mod bounds;
pub mod interval;
pub mod map;
pub mod nest;
pub mod orbit;
pub mod scalar;

use thiserror::Error;

/// Errors shared across the crate. Numerical routines prefer returning a
/// value-style outcome (e.g. [`orbit::EntryOutcome`]) when "failure" is an
/// expected answer; `Error` is for violated preconditions and lost precision.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument outside the map domain [0,1]: {0}")]
    Domain(f64),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("interval component degenerate (J touches the boundary of T)")]
    Degenerate,
    #[error("branch folds at iterate {k}: critical point interior to the image")]
    Fold { k: usize },
    #[error("derivative order {order} unsupported for this family near the critical point")]
    UnsupportedOrder { order: u32 },
    #[error("Schwarzian singular at the critical point")]
    Singular,
    #[error("no sign change over the bracket")]
    NoSignChange,
    #[error("target lies outside the branch image")]
    BracketMiss,
    #[error("monotonicity violated: endpoint images fold")]
    MonotonicityViolation,
    #[error("working precision exhausted: {0}; rerun with an extended-precision backend")]
    Precision(String),
    #[error("critical orbit did not reach the target interval: {0}")]
    NotFound(String),
    #[error("interval is not nice: boundary re-enters at iterate {k}")]
    NotNice { k: usize },
    #[error("{0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
