use serde::{Deserialize, Serialize};

use super::{within, StreamingFilter, TimestampMap};
use crate::event::{Event, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IetsConfig {
    pub inceptive_window_us: u64,
}

impl Default for IetsConfig {
    fn default() -> Self {
        Self { inceptive_window_us: 2_000 }
    }
}

/// Inceptive-event filter. Keeps an event only if its pixel produced no event
/// of the same polarity during the preceding window; the trailing events of a
/// burst are dropped. Every event, kept or not, refreshes its pixel/polarity
/// timestamp, so a sustained burst stays suppressed.
#[derive(Debug, Clone)]
pub struct Iets {
    config: IetsConfig,
    last: [TimestampMap; 2],
}

impl Iets {
    pub fn new(geometry: SensorGeometry, config: IetsConfig) -> Self {
        Self { config, last: [TimestampMap::new(geometry), TimestampMap::new(geometry)] }
    }
}

impl StreamingFilter for Iets {
    fn decide(&mut self, e: &Event) -> bool {
        let map = &mut self.last[e.p.index()];
        let inceptive = !map.get(e.x, e.y).is_some_and(|t| within(e.t, t, self.config.inceptive_window_us));
        map.set(e.x, e.y, e.t);
        inceptive
    }
}
