use serde::{Deserialize, Serialize};

use super::{within, StreamingFilter};
use crate::event::{Event, Polarity, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KNoiseConfig {
    pub dt_us: u64,
}

impl Default for KNoiseConfig {
    fn default() -> Self {
        Self { dt_us: 1_000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stored {
    coord: u16,
    t: u64,
    #[allow(dead_code)]
    p: Polarity,
}

/// KNoise: one memory cell per row (latest `x, t, p`) and one per column
/// (latest `y, t, p`). An event is supported when the latest event of its row
/// sits within one column of it, or the latest of its column within one row,
/// and that event is at most `dt_us` old.
#[derive(Debug, Clone)]
pub struct KNoise {
    config: KNoiseConfig,
    rows: Vec<Option<Stored>>,
    cols: Vec<Option<Stored>>,
}

impl KNoise {
    pub fn new(geometry: SensorGeometry, config: KNoiseConfig) -> Self {
        Self { config, rows: vec![None; geometry.height as usize], cols: vec![None; geometry.width as usize] }
    }

    /// Number of auxiliary state cells, fixed at `width + height`.
    pub fn state_entries(&self) -> usize {
        self.rows.len() + self.cols.len()
    }

    fn supports(cell: Option<Stored>, coord: u16, t: u64, dt: u64) -> bool {
        cell.is_some_and(|s| s.coord.abs_diff(coord) <= 1 && within(t, s.t, dt))
    }
}

impl StreamingFilter for KNoise {
    fn decide(&mut self, e: &Event) -> bool {
        let dt = self.config.dt_us;
        let row = &mut self.rows[e.y as usize];
        let col = &mut self.cols[e.x as usize];
        let keep = Self::supports(*row, e.x, e.t, dt) || Self::supports(*col, e.y, e.t, dt);
        *row = Some(Stored { coord: e.x, t: e.t, p: e.p });
        *col = Some(Stored { coord: e.y, t: e.t, p: e.p });
        keep
    }
}
