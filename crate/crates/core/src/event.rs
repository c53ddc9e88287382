//! Event data model: single DVS events, sensor geometry and time-ordered
//! packets, plus validation and the two slicing schemes used by the metric
//! pipeline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of violations a [`ValidationReport`] lists.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

/// Sign of the log-brightness change that triggered an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Off,
    On,
}

impl Polarity {
    /// `-1` for [`Polarity::Off`], `+1` for [`Polarity::On`].
    #[inline]
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Off => -1,
            Polarity::On => 1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            -1 => Some(Polarity::Off),
            1 => Some(Polarity::On),
            _ => None,
        }
    }

    /// On-disk `{0, 1}` encoding.
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Polarity::Off),
            1 => Some(Polarity::On),
            _ => None,
        }
    }

    #[inline]
    pub fn bit(self) -> u8 {
        match self {
            Polarity::Off => 0,
            Polarity::On => 1,
        }
    }

    /// Dense index usable for per-polarity state tables.
    #[inline]
    pub(crate) fn index(self) -> usize {
        self.bit() as usize
    }
}

/// A single DVS event. Timestamps are integer microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    pub t: u64,
    pub p: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, p: Polarity) -> Self {
        Self { x, y, t, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width: u16,
    pub height: u16,
}

impl SensorGeometry {
    pub fn new(width: u16, height: u16) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("sensor geometry must be non-empty, got {width}x{height}")));
        }
        Ok(Self { width, height })
    }

    /// Total pixel count `K`.
    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major flattened pixel index.
    #[inline]
    pub fn index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (u16, u16) {
        let w = self.width as usize;
        ((index % w) as u16, (index / w) as u16)
    }
}

impl fmt::Display for SensorGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    XOutOfBounds { index: usize },
    YOutOfBounds { index: usize },
    TimestampOrder { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::XOutOfBounds { index } => write!(f, "x out of bounds at index {index}"),
            Violation::YOutOfBounds { index } => write!(f, "y out of bounds at index {index}"),
            Violation::TimestampOrder { index } => write!(f, "timestamp order at index {index}"),
        }
    }
}

/// Outcome of [`validate_events`]. `violations` holds at most
/// [`MAX_REPORTED_VIOLATIONS`] entries; `total` counts all of them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: Violation) {
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(v);
        }
        self.total += 1;
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        write!(f, "{} violation(s)", self.total)?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        if self.total > self.violations.len() {
            write!(f, "\n  ... {} more", self.total - self.violations.len())?;
        }
        Ok(())
    }
}

/// Checks the packet invariants on a raw event sequence.
pub fn validate_events(geometry: &SensorGeometry, events: &[Event]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut prev_t = None;
    for (index, e) in events.iter().enumerate() {
        if e.x >= geometry.width {
            report.push(Violation::XOutOfBounds { index });
        }
        if e.y >= geometry.height {
            report.push(Violation::YOutOfBounds { index });
        }
        if let Some(prev) = prev_t {
            if e.t < prev {
                report.push(Violation::TimestampOrder { index });
            }
        }
        prev_t = Some(e.t);
    }
    report
}

/// Time-ordered events bound to a sensor geometry.
///
/// Packets built through [`EventPacket::new`] always satisfy the ordering and
/// bounds invariants. [`EventPacket::new_unchecked`] exists for readers and
/// tests that need to hold (and then validate) arbitrary data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventPacket {
    geometry: SensorGeometry,
    events: Vec<Event>,
}

impl EventPacket {
    pub fn new(geometry: SensorGeometry, events: Vec<Event>) -> Result<Self> {
        let report = validate_events(&geometry, &events);
        if !report.is_ok() {
            return Err(Error::InvalidPacket(report.to_string()));
        }
        Ok(Self { geometry, events })
    }

    pub fn new_unchecked(geometry: SensorGeometry, events: Vec<Event>) -> Self {
        Self { geometry, events }
    }

    /// Sorts `events` stably by timestamp before validating bounds.
    pub fn from_unsorted(geometry: SensorGeometry, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by_key(|e| e.t);
        Self::new(geometry, events)
    }

    pub fn empty(geometry: SensorGeometry) -> Self {
        Self { geometry, events: Vec::new() }
    }

    #[inline]
    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    #[inline]
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.events.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `(t_first, t_last)`, or `None` for an empty packet.
    pub fn time_span(&self) -> Option<(u64, u64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    pub fn validate(&self) -> ValidationReport {
        validate_events(&self.geometry, &self.events)
    }

    fn sub(&self, events: &[Event]) -> EventPacket {
        EventPacket { geometry: self.geometry, events: events.to_vec() }
    }

    /// Consecutive non-overlapping groups of exactly `group_size` events.
    /// The trailing remainder becomes its own group only with `keep_partial`.
    pub fn slice_by_count(&self, group_size: usize, keep_partial: bool) -> Result<Vec<EventPacket>> {
        if group_size == 0 {
            return Err(Error::invalid("group size must be at least 1"));
        }
        Ok(self
            .events
            .chunks(group_size)
            .filter(|c| keep_partial || c.len() == group_size)
            .map(|c| self.sub(c))
            .collect())
    }

    /// Half-open windows of `window_us` starting at the first timestamp.
    /// Empty windows are kept so the time axis stays regular.
    pub fn slice_by_time(&self, window_us: u64) -> Result<Vec<EventPacket>> {
        if window_us == 0 {
            return Err(Error::invalid("time window must be at least 1 us"));
        }
        let Some((t_first, t_last)) = self.time_span() else {
            return Ok(Vec::new());
        };
        let n_windows = ((t_last - t_first) / window_us + 1) as usize;
        let mut groups = Vec::with_capacity(n_windows);
        let mut start = 0;
        for w in 0..n_windows {
            let end_t = t_first + (w as u64 + 1) * window_us;
            let len = self.events[start..].partition_point(|e| e.t < end_t);
            groups.push(self.sub(&self.events[start..start + len]));
            start += len;
        }
        debug_assert_eq!(start, self.events.len());
        Ok(groups)
    }
}
