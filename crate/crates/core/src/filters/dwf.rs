use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::StreamingFilter;
use crate::event::Event;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwfConfig {
    pub window_len: usize,
    /// L∞ pixel distance.
    pub radius: u16,
    pub threshold: usize,
}

impl Default for DwfConfig {
    fn default() -> Self {
        Self { window_len: 36, radius: 9, threshold: 1 }
    }
}

/// Double window filter. Two FIFOs of recent pixel positions, one for kept
/// and one for dropped events. An event is kept when at least `threshold`
/// stored positions (across both FIFOs) lie within `radius`. No timestamps
/// are involved.
#[derive(Debug, Clone)]
pub struct Dwf {
    config: DwfConfig,
    signal: VecDeque<(u16, u16)>,
    noise: VecDeque<(u16, u16)>,
}

impl Dwf {
    pub fn new(config: DwfConfig) -> Self {
        Self {
            config,
            signal: VecDeque::with_capacity(config.window_len),
            noise: VecDeque::with_capacity(config.window_len),
        }
    }

    fn push(queue: &mut VecDeque<(u16, u16)>, cap: usize, xy: (u16, u16)) {
        if queue.len() == cap {
            queue.pop_front();
        }
        queue.push_back(xy);
    }
}

impl StreamingFilter for Dwf {
    fn decide(&mut self, e: &Event) -> bool {
        let r = self.config.radius;
        let close = self
            .signal
            .iter()
            .chain(&self.noise)
            .filter(|&&(x, y)| x.abs_diff(e.x) <= r && y.abs_diff(e.y) <= r)
            .count();
        let keep = close >= self.config.threshold;
        let cap = self.config.window_len;
        if keep {
            Self::push(&mut self.signal, cap, (e.x, e.y));
        } else {
            Self::push(&mut self.noise, cap, (e.x, e.y));
        }
        keep
    }
}
