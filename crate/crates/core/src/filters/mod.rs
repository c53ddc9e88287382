//! Streaming event denoisers.
//!
//! Every filter is a causal state machine: it sees events in packet order and
//! decides keep/drop for each one using only what came before it. State
//! starts empty, so unsupported early events are dropped, and updates happen
//! after the decision for the current event.

mod baf;
mod dwf;
mod evflow;
mod iets;
mod knoise;
mod time_surface;
mod ynoise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, EventPacket, SensorGeometry};

pub use baf::{Baf, BafConfig};
pub use dwf::{Dwf, DwfConfig};
pub use evflow::{EvFlow, EvFlowConfig};
pub use iets::{Iets, IetsConfig};
pub use knoise::{KNoise, KNoiseConfig};
pub use time_surface::{TimeSurface, TsConfig};
pub use ynoise::{YNoise, YNoiseConfig};

/// Per-event keep/drop decision.
pub trait StreamingFilter {
    fn decide(&mut self, event: &Event) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterDecisionTrace {
    pub kept: Vec<bool>,
    pub kept_count: usize,
    pub dropped_count: usize,
}

impl FilterDecisionTrace {
    pub fn from_flags(kept: Vec<bool>) -> Self {
        let kept_count = kept.iter().filter(|&&k| k).count();
        let dropped_count = kept.len() - kept_count;
        Self { kept, kept_count, dropped_count }
    }

    pub fn kept_ratio(&self) -> f64 {
        let n = self.kept.len();
        if n == 0 {
            1.0
        } else {
            self.kept_count as f64 / n as f64
        }
    }

    /// Kept events in original order.
    pub fn select(&self, packet: &EventPacket) -> EventPacket {
        let events = packet.events().iter().zip(&self.kept).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
        EventPacket::new_unchecked(packet.geometry(), events)
    }
}

pub fn run_filter<F: StreamingFilter>(filter: &mut F, packet: &EventPacket) -> FilterDecisionTrace {
    FilterDecisionTrace::from_flags(packet.events().iter().map(|e| filter.decide(e)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterId {
    Identity,
    Baf,
    KNoise,
    Dwf,
    Ts,
    Iets,
    YNoise,
    EvFlow,
}

impl FilterId {
    pub const ALL: [FilterId; 8] = [
        FilterId::Identity,
        FilterId::Baf,
        FilterId::KNoise,
        FilterId::Dwf,
        FilterId::Ts,
        FilterId::Iets,
        FilterId::YNoise,
        FilterId::EvFlow,
    ];

    /// The seven denoisers, without `identity`.
    pub const DENOISERS: [FilterId; 7] = [
        FilterId::Baf,
        FilterId::KNoise,
        FilterId::Dwf,
        FilterId::Ts,
        FilterId::Iets,
        FilterId::YNoise,
        FilterId::EvFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterId::Identity => "identity",
            FilterId::Baf => "baf",
            FilterId::KNoise => "knoise",
            FilterId::Dwf => "dwf",
            FilterId::Ts => "ts",
            FilterId::Iets => "iets",
            FilterId::YNoise => "ynoise",
            FilterId::EvFlow => "evflow",
        }
    }
}

impl fmt::Display for FilterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| Error::UnknownFilter(s.to_string()))
    }
}

/// A filter id with its parameters. Serialized with the id under `id` and
/// the parameters as sibling fields, e.g. `{"id": "baf", "dt_us": 2000}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum FilterConfig {
    Identity,
    Baf(BafConfig),
    KNoise(KNoiseConfig),
    Dwf(DwfConfig),
    Ts(TsConfig),
    Iets(IetsConfig),
    YNoise(YNoiseConfig),
    EvFlow(EvFlowConfig),
}

impl FilterConfig {
    pub fn default_for(id: FilterId) -> Self {
        match id {
            FilterId::Identity => FilterConfig::Identity,
            FilterId::Baf => FilterConfig::Baf(BafConfig::default()),
            FilterId::KNoise => FilterConfig::KNoise(KNoiseConfig::default()),
            FilterId::Dwf => FilterConfig::Dwf(DwfConfig::default()),
            FilterId::Ts => FilterConfig::Ts(TsConfig::default()),
            FilterId::Iets => FilterConfig::Iets(IetsConfig::default()),
            FilterId::YNoise => FilterConfig::YNoise(YNoiseConfig::default()),
            FilterId::EvFlow => FilterConfig::EvFlow(EvFlowConfig::default()),
        }
    }

    pub fn id(&self) -> FilterId {
        match self {
            FilterConfig::Identity => FilterId::Identity,
            FilterConfig::Baf(_) => FilterId::Baf,
            FilterConfig::KNoise(_) => FilterId::KNoise,
            FilterConfig::Dwf(_) => FilterId::Dwf,
            FilterConfig::Ts(_) => FilterId::Ts,
            FilterConfig::Iets(_) => FilterId::Iets,
            FilterConfig::YNoise(_) => FilterId::YNoise,
            FilterConfig::EvFlow(_) => FilterId::EvFlow,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: u64| {
            if v == 0 {
                Err(Error::invalid(format!("{}: {name} must be > 0", self.id())))
            } else {
                Ok(())
            }
        };
        match self {
            FilterConfig::Identity => Ok(()),
            FilterConfig::Baf(c) => positive("dt_us", c.dt_us),
            FilterConfig::KNoise(c) => positive("dt_us", c.dt_us),
            FilterConfig::Dwf(c) => {
                positive("window_len", c.window_len as u64)?;
                positive("radius", c.radius as u64)?;
                positive("threshold", c.threshold as u64)
            }
            FilterConfig::Ts(c) => {
                positive("decay_tau_us", c.decay_tau_us)?;
                positive("radius", c.radius as u64)?;
                if !(0.0..1.0).contains(&c.surface_threshold) {
                    return Err(Error::invalid("ts: surface_threshold must lie in [0, 1)"));
                }
                Ok(())
            }
            FilterConfig::Iets(c) => positive("inceptive_window_us", c.inceptive_window_us),
            FilterConfig::YNoise(c) => {
                positive("radius", c.radius as u64)?;
                positive("dt_us", c.dt_us)
            }
            FilterConfig::EvFlow(c) => {
                positive("radius", c.radius as u64)?;
                positive("dt_us", c.dt_us)?;
                positive("min_neighbors", c.min_neighbors as u64)?;
                if !(c.residual_threshold_us.is_finite() && c.residual_threshold_us > 0.0) {
                    return Err(Error::invalid("evflow: residual_threshold_us must be > 0"));
                }
                Ok(())
            }
        }
    }

    /// Overrides one parameter from a `key=value` pair, keeping the others.
    pub fn with_param(&self, key: &str, value: &str) -> Result<Self> {
        let mut json = serde_json::to_value(self).map_err(|e| Error::invalid(e.to_string()))?;
        let obj = json.as_object_mut().expect("filter configs serialize to objects");
        if key == "id" || !obj.contains_key(key) {
            return Err(Error::invalid(format!("{} has no parameter `{key}`", self.id())));
        }
        let parsed: serde_json::Value = if let Ok(i) = value.parse::<u64>() {
            i.into()
        } else if let Ok(f) = value.parse::<f64>() {
            f.into()
        } else {
            return Err(Error::invalid(format!("parameter `{key}`: `{value}` is not a number")));
        };
        obj.insert(key.to_string(), parsed);
        let updated: FilterConfig =
            serde_json::from_value(json).map_err(|e| Error::invalid(format!("parameter `{key}`: {e}")))?;
        updated.validate()?;
        Ok(updated)
    }

    pub fn build(&self, geometry: SensorGeometry) -> Result<Box<dyn StreamingFilter + Send>> {
        self.validate()?;
        Ok(match self {
            FilterConfig::Identity => Box::new(KeepAll),
            FilterConfig::Baf(c) => Box::new(Baf::new(geometry, *c)),
            FilterConfig::KNoise(c) => Box::new(KNoise::new(geometry, *c)),
            FilterConfig::Dwf(c) => Box::new(Dwf::new(*c)),
            FilterConfig::Ts(c) => Box::new(TimeSurface::new(geometry, *c)),
            FilterConfig::Iets(c) => Box::new(Iets::new(geometry, *c)),
            FilterConfig::YNoise(c) => Box::new(YNoise::new(geometry, *c)),
            FilterConfig::EvFlow(c) => Box::new(EvFlow::new(geometry, *c)),
        })
    }
}

struct KeepAll;

impl StreamingFilter for KeepAll {
    fn decide(&mut self, _: &Event) -> bool {
        true
    }
}

impl<F: StreamingFilter + ?Sized> StreamingFilter for Box<F> {
    fn decide(&mut self, event: &Event) -> bool {
        (**self).decide(event)
    }
}

/// Runs a fresh instance of the configured filter over the packet and returns
/// the kept events with the full decision trace.
pub fn apply_filter(packet: &EventPacket, config: &FilterConfig) -> Result<(EventPacket, FilterDecisionTrace)> {
    let mut filter = config.build(packet.geometry())?;
    let trace = run_filter(&mut filter, packet);
    Ok((trace.select(packet), trace))
}

/// Same as [`apply_filter`] with the filter named by a string id.
pub fn apply_filter_by_id(packet: &EventPacket, id: &str) -> Result<(EventPacket, FilterDecisionTrace)> {
    apply_filter(packet, &FilterConfig::default_for(id.parse()?))
}

/// Last-event timestamp per pixel; `None` until the pixel fires.
#[derive(Debug, Clone)]
pub(crate) struct TimestampMap {
    geometry: SensorGeometry,
    last: Vec<Option<u64>>,
}

impl TimestampMap {
    pub(crate) fn new(geometry: SensorGeometry) -> Self {
        Self { geometry, last: vec![None; geometry.pixel_count()] }
    }

    #[inline]
    pub(crate) fn get(&self, x: u16, y: u16) -> Option<u64> {
        self.last[self.geometry.index(x, y)]
    }

    #[inline]
    pub(crate) fn set(&mut self, x: u16, y: u16, t: u64) {
        let i = self.geometry.index(x, y);
        self.last[i] = Some(t);
    }

    /// In-sensor pixels of the `(2r+1)²` square around `(x, y)`, excluding
    /// the centre.
    pub(crate) fn neighbours(&self, x: u16, y: u16, r: u16) -> impl Iterator<Item = (u16, u16, Option<u64>)> + '_ {
        let g = self.geometry;
        let x0 = x.saturating_sub(r);
        let y0 = y.saturating_sub(r);
        let x1 = (x as u32 + r as u32).min(g.width as u32 - 1) as u16;
        let y1 = (y as u32 + r as u32).min(g.height as u32 - 1) as u16;
        (y0..=y1)
            .flat_map(move |ny| (x0..=x1).map(move |nx| (nx, ny)))
            .filter(move |&(nx, ny)| (nx, ny) != (x, y))
            .map(move |(nx, ny)| (nx, ny, self.get(nx, ny)))
    }
}

/// `t - past <= window`, for `past <= t`.
#[inline]
pub(crate) fn within(t: u64, past: u64, window: u64) -> bool {
    t.saturating_sub(past) <= window
}
