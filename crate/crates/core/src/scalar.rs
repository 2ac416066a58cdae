//! Arithmetic backend abstraction.
//!
//! All dynamics code is generic over [`Scalar`]. Two backends are provided:
//! plain `f64`, and [`Mp`], a wrapper around an arbitrary-precision float.
//! Extended precision is needed when cascade work pushes interval widths or
//! parameter offsets below what binary64 resolves (tangency distances of
//! 1e-10 and smaller).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default mantissa precision (bits) for newly constructed [`Mp`] values.
/// Set once per run before any `Mp` is built; reads are relaxed because the
/// value is configuration, not synchronization.
static MP_PRECISION_BITS: AtomicU32 = AtomicU32::new(192);

/// Sets the global default precision for the big-float backend, in bits.
/// Returns the previous value. Call before constructing `Mp` values.
pub fn set_mp_precision_bits(bits: u32) -> u32 {
    let bits = bits.clamp(64, 16384);
    MP_PRECISION_BITS.swap(bits, AtomicOrdering::Relaxed)
}

/// Current default precision of the big-float backend, in bits.
pub fn mp_precision_bits() -> u32 {
    MP_PRECISION_BITS.load(AtomicOrdering::Relaxed)
}

/// Converts a request for decimal digits into mantissa bits with guard room.
pub fn bits_for_decimal_digits(digits: u32) -> u32 {
    // log2(10) = 3.3219...; add guard bits so printing round-trips.
    (digits as f64 * 3.3219897).ceil() as u32 + 32
}

thread_local! {
    // Constants cache used by parse/pow; per-thread so parallel sweeps don't
    // contend on a lock.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// The arithmetic the dynamics runs on. Deliberately minimal: just what the
/// algorithms use, so the big-float backend stays easy to audit.
pub trait Scalar: Clone + PartialOrd + std::fmt::Debug + Send + Sync + 'static {
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// `|self|^e` for positive bases; used by Hölder-weighted sums.
    fn powf(&self, e: f64) -> Self;
    /// Machine epsilon of the backend (relative resolution at 1.0).
    fn epsilon() -> Self;
    /// Parses a decimal literal at full backend precision.
    fn parse(s: &str) -> Option<Self>;
    /// Short name of the backend for reports ("f64", "ext50", ...).
    fn backend_name() -> String;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn half(a: &Self, b: &Self) -> Self {
        a.add(b).mul(&Self::from_f64(0.5))
    }
    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
    fn is_sign_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, e: f64) -> Self {
        f64::powf(f64::abs(*self), e)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn backend_name() -> String {
        "f64".into()
    }
}

/// Arbitrary-precision scalar. Each value carries the precision it was built
/// with; binary operations work at the larger of the two operand precisions,
/// so mixed-precision expressions never silently truncate.
#[derive(Clone, Debug)]
pub struct Mp {
    v: BigFloat,
    prec: u32,
}

impl Mp {
    fn wrap(v: BigFloat, prec: u32) -> Self {
        Mp { v, prec }
    }
    fn join(&self, rhs: &Self) -> u32 {
        self.prec.max(rhs.prec)
    }
    pub fn precision_bits(&self) -> u32 {
        self.prec
    }
    pub fn raw(&self) -> &BigFloat {
        &self.v
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl Scalar for Mp {
    fn from_f64(v: f64) -> Self {
        let p = mp_precision_bits() as usize;
        Mp::wrap(BigFloat::from_f64(v, p), p as u32)
    }

    fn to_f64(&self) -> f64 {
        // BigFloat exposes no direct f64 conversion; rebuild the value from
        // the top two mantissa words and the binary exponent.
        if self.v.is_zero() {
            return 0.0;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.v.as_raw_parts() {
            Some((words, _len, sign, exp, _inexact)) => {
                let n = words.len();
                let top = words[n - 1] as f64;
                let next = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
                // mantissa interpreted as 0.fraction in base 2^64
                let frac = top / 1.8446744073709552e19 + next / 3.402823669209385e38;
                let m = frac * 2f64.powi(exp);
                if sign == Sign::Neg {
                    -m
                } else {
                    m
                }
            }
            None => f64::NAN,
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Mp::wrap(self.v.add(&rhs.v, p as usize, RM), p)
    }
    fn sub(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Mp::wrap(self.v.sub(&rhs.v, p as usize, RM), p)
    }
    fn mul(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Mp::wrap(self.v.mul(&rhs.v, p as usize, RM), p)
    }
    fn div(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Mp::wrap(self.v.div(&rhs.v, p as usize, RM), p)
    }
    fn neg(&self) -> Self {
        Mp::wrap(self.v.neg(), self.prec)
    }
    fn abs(&self) -> Self {
        Mp::wrap(self.v.abs(), self.prec)
    }
    fn sqrt(&self) -> Self {
        Mp::wrap(self.v.sqrt(self.prec as usize, RM), self.prec)
    }
    fn powf(&self, e: f64) -> Self {
        let p = self.prec as usize;
        let base = self.v.abs();
        let ex = BigFloat::from_f64(e, p);
        let out = CONSTS.with(|c| base.pow(&ex, p, RM, &mut c.borrow_mut()));
        Mp::wrap(out, self.prec)
    }
    fn epsilon() -> Self {
        let p = mp_precision_bits();
        // 2^(1-p): relative resolution of a p-bit mantissa
        let mut e = BigFloat::from_f64(1.0, p as usize);
        e.set_exponent(1 - p as i32 + 1);
        Mp::wrap(e, p)
    }
    fn parse(s: &str) -> Option<Self> {
        let p = mp_precision_bits() as usize;
        // parse signals failure by returning NaN rather than an error value
        let v = CONSTS.with(|c| {
            BigFloat::parse(s, astro_float::Radix::Dec, p, RM, &mut c.borrow_mut())
        });
        if v.is_nan() {
            return None;
        }
        Some(Mp::wrap(v, p as u32))
    }
    fn backend_name() -> String {
        let digits = (mp_precision_bits() as f64 / 3.3219897).floor() as u32;
        format!("ext{digits}")
    }
}
