//! Canonical synthetic flood scenario.
//!
//! Five days on a one-hour grid. The stream sits at a base level with two
//! triangular flood pulses that cross the critical level, and the irradiance
//! follows a half-sine between sunrise and sunset. Both flood peaks fall in
//! daylight hours.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{nonnegative, positive, Error, Result};
use crate::math::{floor, sin};
use crate::sim::Dataset;

/// A flood pulse: linear rise to `peak` at `center_hour`, then linear fall,
/// reaching the base level `half_width_hours` either side of the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloodPulse {
    pub center_hour: f64,
    pub half_width_hours: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Unix time of window 0, at local midnight.
    pub start: i64,
    pub days: usize,
    pub window_hours: f64,
    pub base_level: f64,
    pub pulses: Vec<FloodPulse>,
    pub irradiance_peak: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    pub irradiance_scale: f64,
    /// Half-width of the uniform noise added to the stream level.
    pub process_noise: f64,
    pub seed: u64,
}

/// 2023-07-17T00:00:00Z.
pub const CANONICAL_START: i64 = 1_689_552_000;

impl Scenario {
    pub fn canonical() -> Self {
        Self {
            start: CANONICAL_START,
            days: 5,
            window_hours: 1.0,
            base_level: 0.5,
            pulses: alloc::vec![
                FloodPulse {
                    center_hour: 37.0,
                    half_width_hours: 8.0,
                    peak: 3.5,
                },
                FloodPulse {
                    center_hour: 84.0,
                    half_width_hours: 8.0,
                    peak: 3.5,
                },
            ],
            irradiance_peak: 900.0,
            sunrise_hour: 6.0,
            sunset_hour: 18.0,
            irradiance_scale: 1.0,
            process_noise: 0.0,
            seed: 0,
        }
    }

    pub fn windows(&self) -> usize {
        let per_day = (24.0 / self.window_hours) as usize;
        self.days * per_day
    }

    fn validate(&self) -> Result<()> {
        positive("window_hours", self.window_hours)?;
        let per_day = 24.0 / self.window_hours;
        if floor(per_day) != per_day {
            return Err(Error::OutOfRange {
                field: "window_hours",
                value: self.window_hours,
                expected: "a divisor of 24",
            });
        }
        nonnegative("base_level", self.base_level)?;
        nonnegative("irradiance_peak", self.irradiance_peak)?;
        nonnegative("irradiance_scale", self.irradiance_scale)?;
        nonnegative("process_noise", self.process_noise)?;
        if !(0.0..=24.0).contains(&self.sunrise_hour) || !(self.sunrise_hour..=24.0).contains(&self.sunset_hour) {
            return Err(Error::OutOfRange {
                field: "sunset_hour",
                value: self.sunset_hour,
                expected: "0 <= sunrise <= sunset <= 24",
            });
        }
        for p in &self.pulses {
            positive("half_width_hours", p.half_width_hours)?;
            nonnegative("peak", p.peak)?;
        }
        Ok(())
    }

    /// Noise-free stream level at `hour` hours after the start.
    pub fn level_at(&self, hour: f64) -> f64 {
        self.pulses.iter().fold(self.base_level, |level, p| {
            let shape = 1.0 - (hour - p.center_hour).abs() / p.half_width_hours;
            level.max(self.base_level + (p.peak - self.base_level) * shape.max(0.0))
        })
    }

    /// Irradiance at `hour` hours after the start, before scaling.
    pub fn irradiance_at(&self, hour: f64) -> f64 {
        let h = hour - 24.0 * floor(hour / 24.0);
        if h <= self.sunrise_hour || h >= self.sunset_hour {
            return 0.0;
        }
        let phase = (h - self.sunrise_hour) / (self.sunset_hour - self.sunrise_hour);
        self.irradiance_peak * sin(core::f64::consts::PI * phase)
    }

    /// Whether window `i` lies inside a flood pulse.
    pub fn in_flood(&self, i: usize) -> bool {
        let hour = i as f64 * self.window_hours;
        self.pulses
            .iter()
            .any(|p| (hour - p.center_hour).abs() < p.half_width_hours)
    }

    /// Window-by-window flood membership, aligned with [`Scenario::generate`].
    pub fn flood_mask(&self) -> Vec<bool> {
        (0..self.windows()).map(|i| self.in_flood(i)).collect()
    }

    /// The scenario's dataset.
    ///
    /// The stream level of a window is taken at its start; the irradiance
    /// of a window at its midpoint. The same seed always gives the same data.
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        let n = self.windows();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut process = Vec::with_capacity(n);
        let mut irradiance = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 * self.window_hours;
            let mut x = self.level_at(t);
            if self.process_noise > 0.0 {
                x = (x + rng.random_range(-self.process_noise..=self.process_noise)).max(0.0);
            }
            process.push(x);
            irradiance.push(self.irradiance_scale * self.irradiance_at(t + 0.5 * self.window_hours));
        }
        Dataset::new(self.start, self.window_hours, process, irradiance)
    }
}
