//! The lab clock.
//!
//! Time only moves when the lab advances it, so fixtures can state the
//! wall-clock durations experiments really use (two-minute isolation gaps,
//! 188-minute power-offs). `scale` paces execution in real time: the
//! default 0.001 real-seconds per virtual-second turns a two-minute wait
//! into 120 ms; zero disables pacing entirely for instant runs.

use crate::time::{VirtualDuration, VirtualTime};

pub const DEFAULT_SCALE: f64 = 0.001;

#[derive(Debug, Clone)]
pub struct VirtualClock {
    now: VirtualTime,
    scale: f64,
}

impl VirtualClock {
    pub fn new(scale: f64) -> VirtualClock {
        assert!(scale >= 0.0, "clock scale must not be negative");
        VirtualClock { now: VirtualTime::ZERO, scale }
    }

    pub fn now(&self) -> VirtualTime {
        self.now
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Move the clock forward, never backward, pacing by `scale`.
    pub fn advance_to(&mut self, target: VirtualTime) {
        if target <= self.now {
            return;
        }
        let delta: VirtualDuration = target - self.now;
        if self.scale > 0.0 {
            std::thread::sleep(std::time::Duration::from_secs_f64(
                delta.as_secs_f64() * self.scale,
            ));
        }
        self.now = target;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_advances() {
        let mut clock = VirtualClock::new(0.0);
        assert_eq!(clock.now(), VirtualTime::ZERO);
        clock.advance_to(VirtualTime::from_millis(500));
        assert_eq!(clock.now().as_millis(), 500);
        // Never moves backward.
        clock.advance_to(VirtualTime::from_millis(100));
        assert_eq!(clock.now().as_millis(), 500);
    }

    #[test]
    fn pacing_sleeps_scaled_real_time() {
        let mut clock = VirtualClock::new(0.0001);
        let start = std::time::Instant::now();
        clock.advance_to(VirtualTime::from_millis(120_000)); // 120 virtual s
        let elapsed = start.elapsed();
        assert!(elapsed >= std::time::Duration::from_millis(10), "slept {elapsed:?}");
        assert!(elapsed < std::time::Duration::from_millis(500), "slept {elapsed:?}");
    }
}
