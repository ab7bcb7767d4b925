//! Interval-number arithmetic and the interval-valued realization function.
//!
//! An [`Interval`] is a closed interval `[lo, hi]` with `lo <= hi`; a
//! degenerate interval `[c, c]` stands for the real number `c`. The five
//! arithmetic operations follow the interval-number calculus used by the
//! model layer, with two normalizations worth knowing about:
//!
//! * subtraction is endpoint-wise (`[a.lo - b.lo, a.hi - b.hi]`), which is
//!   only a valid interval when `a` is at least as wide as `b`; invalid
//!   results are rejected rather than reordered,
//! * the reciprocal used by division is ordered `[1/b.hi, 1/b.lo]` so the
//!   `lo <= hi` invariant always holds.
//!
//! Endpoints use plain nearest-rounding f64 arithmetic. This feeds a Monte
//! Carlo engine, so outward rounding would add nothing but noise.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval: lo {lo} > hi {hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("interval endpoints must be finite, got [{lo}, {hi}]")]
    NonFiniteEndpoint { lo: f64, hi: f64 },
    #[error("scalar multiplier must be a positive real, got {0}")]
    NonPositiveScalar(f64),
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByZeroInterval { lo: f64, hi: f64 },
    #[error("precision level must lie in [0, 1], got {0}")]
    OutOfRange(f64),
    #[error("interval must have strictly positive endpoints, got [{lo}, {hi}]")]
    NonPositiveInterval { lo: f64, hi: f64 },
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NonFiniteEndpoint { lo, hi });
        }
        if lo > hi {
            return Err(IntervalError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[value, value]`, i.e. the real number itself.
    pub fn point(value: f64) -> Result<Self, IntervalError> {
        Self::new(value, value)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `A + B = [a.lo + b.lo, a.hi + b.hi]`.
    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// Endpoint-wise subtraction `[a.lo - b.lo, a.hi - b.hi]`.
    ///
    /// This is not the standard interval subtraction: it produces an invalid
    /// interval whenever `other` is wider than `self` (e.g. `[1,2] - [0,5]`),
    /// in which case `InvalidInterval` is returned instead of a reordered
    /// result.
    pub fn sub(&self, other: &Interval) -> Result<Interval, IntervalError> {
        Interval::new(self.lo - other.lo, self.hi - other.hi)
    }

    /// `alpha * A` for a positive scalar `alpha`.
    pub fn scale(&self, alpha: f64) -> Result<Interval, IntervalError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(IntervalError::NonPositiveScalar(alpha));
        }
        Ok(Interval {
            lo: alpha * self.lo,
            hi: alpha * self.hi,
        })
    }

    /// `A * B`: min/max over the four endpoint products.
    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            self.lo * other.lo,
            self.hi * other.lo,
            self.lo * other.hi,
            self.hi * other.hi,
        ];
        let mut lo = products[0];
        let mut hi = products[0];
        for &p in &products[1..] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Interval { lo, hi }
    }

    /// `A / B = A * [1/b.hi, 1/b.lo]`; requires `0` not in `B`.
    pub fn div(&self, other: &Interval) -> Result<Interval, IntervalError> {
        if other.contains(0.0) {
            return Err(IntervalError::DivisionByZeroInterval {
                lo: other.lo,
                hi: other.hi,
            });
        }
        let recip = Interval {
            lo: 1.0 / other.hi,
            hi: 1.0 / other.lo,
        };
        Ok(self.mul(&recip))
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(deserializer)?;
        Interval::new(lo, hi).map_err(D::Error::custom)
    }
}

/// Interval with strictly positive endpoints, the domain of [`realize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveInterval {
    inner: Interval,
}

impl Serialize for PositiveInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.inner.serialize(serializer)
    }
}

impl PositiveInterval {
    pub fn new(interval: Interval) -> Result<Self, IntervalError> {
        if interval.lo <= 0.0 {
            return Err(IntervalError::NonPositiveInterval {
                lo: interval.lo,
                hi: interval.hi,
            });
        }
        Ok(Self { inner: interval })
    }

    pub fn from_endpoints(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        Self::new(Interval::new(lo, hi)?)
    }

    pub fn interval(&self) -> &Interval {
        &self.inner
    }

    pub fn lo(&self) -> f64 {
        self.inner.lo
    }

    pub fn hi(&self) -> f64 {
        self.inner.hi
    }

    /// The interval-valued function `f(k) = lo^(1-k) * hi^k` for `k in [0,1]`.
    ///
    /// `f(0) = lo` and `f(1) = hi` hold exactly; interior values are the
    /// weighted geometric interpolation, monotone nondecreasing in `k` and
    /// contained in `[lo, hi]`.
    pub fn realize(&self, k: f64) -> Result<f64, IntervalError> {
        if !(0.0..=1.0).contains(&k) {
            return Err(IntervalError::OutOfRange(k));
        }
        // Exact at the endpoints and for degenerate intervals.
        if k == 0.0 || self.inner.is_degenerate() {
            return Ok(self.inner.lo);
        }
        if k == 1.0 {
            return Ok(self.inner.hi);
        }
        Ok(self.inner.lo.powf(1.0 - k) * self.inner.hi.powf(k))
    }
}

/// Free-function form of [`PositiveInterval::realize`].
pub fn realize(g: &PositiveInterval, k: f64) -> Result<f64, IntervalError> {
    g.realize(k)
}
