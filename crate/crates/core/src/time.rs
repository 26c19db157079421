//! Fixed-point simulation time.
//!
//! All clocks, durations and work amounts are integer ticks of one
//! microsecond (1e-6 time units). Schedules and metrics are therefore exactly
//! reproducible; floating point only appears at the boundaries (JSON, speed
//! and frequency ratios).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of ticks in one time unit.
pub const TICKS_PER_UNIT: i64 = 1_000_000;

/// A point in simulated time, a duration, or an amount of work (work is
/// measured in time units at unit speed and full frequency).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    pub const MAX: Time = Time(i64::MAX);
    /// The clock resolution.
    pub const RESOLUTION: Time = Time(1);

    pub const fn from_ticks(ticks: i64) -> Self {
        Time(ticks)
    }

    pub const fn ticks(self) -> i64 {
        self.0
    }

    /// Whole time units.
    pub const fn units(units: i64) -> Self {
        Time(units * TICKS_PER_UNIT)
    }

    /// Converts from floating time units, rounding to the nearest tick.
    pub fn from_f64(units: f64) -> Self {
        Time((units * TICKS_PER_UNIT as f64).round() as i64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / TICKS_PER_UNIT as f64
    }

    /// `self * factor`, rounded to the nearest tick.
    pub fn scale(self, factor: f64) -> Self {
        Time((self.0 as f64 * factor).round() as i64)
    }

    /// Time needed to process `self` at `rate` (work per time unit).
    ///
    /// Rounds up to the next tick, except that results within a millionth of
    /// a tick of an integer snap to it so that e.g. `6 / 0.6` is exactly `10`.
    pub fn div_rate(self, rate: f64) -> Self {
        debug_assert!(rate > 0.0);
        Time(snap_ceil(self.0 as f64 / rate))
    }

    pub fn max(self, other: Time) -> Time {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Time) -> Time {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

pub(crate) fn snap_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-6 {
        r as i64
    } else {
        x.ceil() as i64
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<i64> for Time {
    type Output = Time;
    fn mul(self, rhs: i64) -> Time {
        Time(self.0 * rhs)
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(serde::de::Error::custom("time must be finite"));
        }
        Ok(Time::from_f64(v))
    }
}
