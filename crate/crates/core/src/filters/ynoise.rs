use serde::{Deserialize, Serialize};

use super::{within, StreamingFilter, TimestampMap};
use crate::event::{Event, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct YNoiseConfig {
    pub radius: u16,
    pub dt_us: u64,
    pub density_threshold: u32,
}

impl Default for YNoiseConfig {
    fn default() -> Self {
        Self { radius: 2, dt_us: 10_000, density_threshold: 2 }
    }
}

/// Spatiotemporal density filter: density is the number of neighbouring
/// pixels (square of radius `r`, centre excluded) that fired within `dt_us`.
#[derive(Debug, Clone)]
pub struct YNoise {
    config: YNoiseConfig,
    last: TimestampMap,
}

impl YNoise {
    pub fn new(geometry: SensorGeometry, config: YNoiseConfig) -> Self {
        Self { config, last: TimestampMap::new(geometry) }
    }

    pub fn density(&self, e: &Event) -> u32 {
        self.last
            .neighbours(e.x, e.y, self.config.radius)
            .filter(|(_, _, t)| t.is_some_and(|t| within(e.t, t, self.config.dt_us)))
            .count() as u32
    }
}

impl StreamingFilter for YNoise {
    fn decide(&mut self, e: &Event) -> bool {
        let keep = self.density(e) >= self.config.density_threshold;
        self.last.set(e.x, e.y, e.t);
        keep
    }
}
