//! Virtual time units.
//!
//! Everything in the lab is scheduled in virtual seconds so fixtures can
//! state wall-clock durations (two-minute waits, 188-minute power-offs)
//! while runs complete in milliseconds. Stored with millisecond resolution.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// A point on the virtual timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct VirtualTime(u64);

/// A span of virtual time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct VirtualDuration(u64);

impl VirtualTime {
    pub const ZERO: VirtualTime = VirtualTime(0);

    pub fn from_millis(ms: u64) -> Self {
        VirtualTime(ms)
    }

    pub fn as_millis(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Duration elapsed since `earlier`; zero if `earlier` is in the future.
    pub fn since(self, earlier: VirtualTime) -> VirtualDuration {
        VirtualDuration(self.0.saturating_sub(earlier.0))
    }
}

impl VirtualDuration {
    pub const ZERO: VirtualDuration = VirtualDuration(0);

    pub const fn from_millis(ms: u64) -> Self {
        VirtualDuration(ms)
    }

    pub const fn from_secs(secs: u64) -> Self {
        VirtualDuration(secs * 1000)
    }

    pub fn from_secs_f64(secs: f64) -> Self {
        VirtualDuration((secs * 1000.0).round() as u64)
    }

    pub fn as_millis(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl Add<VirtualDuration> for VirtualTime {
    type Output = VirtualTime;
    fn add(self, rhs: VirtualDuration) -> VirtualTime {
        VirtualTime(self.0 + rhs.0)
    }
}

impl AddAssign<VirtualDuration> for VirtualTime {
    fn add_assign(&mut self, rhs: VirtualDuration) {
        self.0 += rhs.0;
    }
}

impl Sub for VirtualTime {
    type Output = VirtualDuration;
    fn sub(self, rhs: VirtualTime) -> VirtualDuration {
        VirtualDuration(self.0.saturating_sub(rhs.0))
    }
}

impl Add for VirtualDuration {
    type Output = VirtualDuration;
    fn add(self, rhs: VirtualDuration) -> VirtualDuration {
        VirtualDuration(self.0 + rhs.0)
    }
}

impl From<f64> for VirtualTime {
    fn from(secs: f64) -> Self {
        VirtualTime((secs * 1000.0).round() as u64)
    }
}

impl From<VirtualTime> for f64 {
    fn from(t: VirtualTime) -> f64 {
        t.as_secs_f64()
    }
}

impl From<f64> for VirtualDuration {
    fn from(secs: f64) -> Self {
        VirtualDuration::from_secs_f64(secs)
    }
}

impl From<VirtualDuration> for f64 {
    fn from(d: VirtualDuration) -> f64 {
        d.as_secs_f64()
    }
}

impl fmt::Display for VirtualTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.as_secs_f64())
    }
}

impl fmt::Display for VirtualDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.as_secs_f64())
    }
}
