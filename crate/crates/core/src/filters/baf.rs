use serde::{Deserialize, Serialize};

use super::{within, StreamingFilter, TimestampMap};
use crate::event::{Event, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BafConfig {
    pub dt_us: u64,
}

impl Default for BafConfig {
    fn default() -> Self {
        Self { dt_us: 2_000 }
    }
}

/// Background activity filter: keeps an event when one of its eight
/// neighbours fired within `dt_us`. Reads neighbours, writes only its own
/// pixel.
#[derive(Debug, Clone)]
pub struct Baf {
    config: BafConfig,
    last: TimestampMap,
}

impl Baf {
    pub fn new(geometry: SensorGeometry, config: BafConfig) -> Self {
        Self { config, last: TimestampMap::new(geometry) }
    }
}

impl StreamingFilter for Baf {
    fn decide(&mut self, e: &Event) -> bool {
        let dt = self.config.dt_us;
        let keep = self.last.neighbours(e.x, e.y, 1).any(|(_, _, t)| t.is_some_and(|t| within(e.t, t, dt)));
        self.last.set(e.x, e.y, e.t);
        keep
    }
}
