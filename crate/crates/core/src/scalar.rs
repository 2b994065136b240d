//! Coordinate scalars.
//!
//! The pillow geometry (gluing, the map, inverse branches, tile membership)
//! only needs ordered field arithmetic plus `floor`, so it is written once
//! over [`Coord`] and instantiated with binary floats for numerics and with
//! rationals where incidences at grid vertices must be decided exactly.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Num, NumCast};

/// Ordered field scalar usable as a pillow coordinate.
pub trait Coord: Num + Clone + PartialOrd + Debug + Send + Sync {
    /// Largest integer not exceeding `self`.
    fn floor_i64(&self) -> i64;

    fn from_i64(v: i64) -> Self;

    /// Lossy view used for reporting and metric computations.
    fn to_f64(&self) -> f64;

    /// Distance below which a coordinate is snapped onto 0 or 1.
    fn snap_tolerance() -> Self;

    /// Distance outside `[0, 1]` still accepted (and clamped) as a coordinate.
    fn domain_tolerance() -> Self;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

macro_rules! float_coord {
    ($t:ty, $snap:expr, $dom:expr) => {
        impl Coord for $t {
            fn floor_i64(&self) -> i64 {
                self.floor() as i64
            }
            fn from_i64(v: i64) -> Self {
                <$t as NumCast>::from(v).unwrap_or(<$t>::NAN)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn snap_tolerance() -> Self {
                $snap
            }
            fn domain_tolerance() -> Self {
                $dom
            }
        }
    };
}

float_coord!(f64, 1e-12, 1e-9);
float_coord!(f32, 1e-6, 1e-5);

impl Coord for Rational64 {
    fn floor_i64(&self) -> i64 {
        *self.floor().numer()
    }
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn snap_tolerance() -> Self {
        Rational64::from_integer(0)
    }
    fn domain_tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

/// Pairwise (tree) summation over a slice; the reduction shape depends only
/// on the length, so results do not depend on how work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Neumaier compensated running sum, used where terms arrive in a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
