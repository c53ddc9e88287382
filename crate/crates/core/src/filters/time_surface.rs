use serde::{Deserialize, Serialize};

use super::{StreamingFilter, TimestampMap};
use crate::event::{Event, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsConfig {
    pub decay_tau_us: u64,
    pub radius: u16,
    pub surface_threshold: f64,
}

impl Default for TsConfig {
    fn default() -> Self {
        Self { decay_tau_us: 20_000, radius: 1, surface_threshold: 0.3 }
    }
}

/// Time-surface filter. The surface value of a neighbour is
/// `exp(-(t - T_last) / tau)`, 0 if it never fired; an event is kept when the
/// mean over the `(2r+1)² - 1` neighbour slots reaches `surface_threshold`.
/// Slots outside the sensor count as 0.
#[derive(Debug, Clone)]
pub struct TimeSurface {
    config: TsConfig,
    last: TimestampMap,
    slots: f64,
}

impl TimeSurface {
    pub fn new(geometry: SensorGeometry, config: TsConfig) -> Self {
        let side = 2 * config.radius as u64 + 1;
        Self { config, last: TimestampMap::new(geometry), slots: (side * side - 1) as f64 }
    }

    pub fn mean_surface(&self, e: &Event) -> f64 {
        let tau = self.config.decay_tau_us as f64;
        let sum: f64 = self
            .last
            .neighbours(e.x, e.y, self.config.radius)
            .filter_map(|(_, _, t)| t)
            .map(|t| (-(e.t.saturating_sub(t) as f64) / tau).exp())
            .sum();
        sum / self.slots
    }
}

impl StreamingFilter for TimeSurface {
    fn decide(&mut self, e: &Event) -> bool {
        let keep = self.mean_surface(e) >= self.config.surface_threshold;
        self.last.set(e.x, e.y, e.t);
        keep
    }
}
