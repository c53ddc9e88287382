use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{EventPacket, SensorGeometry};

/// Where linear warps project events to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefTime {
    /// A fixed timestamp in microseconds.
    Absolute(u64),
    /// The first timestamp of whichever packet is being warped.
    PacketStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WarpModel {
    #[default]
    Identity,
    /// Constant optic flow in pixels per second.
    Linear { vx: f64, vy: f64, t_ref: RefTime },
}

impl WarpModel {
    pub fn linear(vx: f64, vy: f64) -> Self {
        WarpModel::Linear { vx, vy, t_ref: RefTime::PacketStart }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WarpModel::Identity => Ok(()),
            WarpModel::Linear { vx, vy, .. } if vx.is_finite() && vy.is_finite() => Ok(()),
            WarpModel::Linear { .. } => Err(Error::invalid("linear warp velocity must be finite")),
        }
    }
}

impl fmt::Display for WarpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarpModel::Identity => write!(f, "identity"),
            WarpModel::Linear { vx, vy, t_ref: RefTime::PacketStart } => write!(f, "linear:{vx},{vy}"),
            WarpModel::Linear { vx, vy, t_ref: RefTime::Absolute(t) } => write!(f, "linear:{vx},{vy},{t}"),
        }
    }
}

/// Parses `identity`, `linear:vx,vy` or `linear:vx,vy,tref`.
impl FromStr for WarpModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(WarpModel::Identity);
        }
        let bad = || Error::invalid(format!("bad warp `{s}`: expected identity | linear:vx,vy[,tref]"));
        let args = s.strip_prefix("linear:").ok_or_else(bad)?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let (vx, vy) = match parts.as_slice() {
            [vx, vy] | [vx, vy, _] => (vx.parse().map_err(|_| bad())?, vy.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        let t_ref = match parts.get(2) {
            Some(t) => RefTime::Absolute(t.parse().map_err(|_| bad())?),
            None => RefTime::PacketStart,
        };
        let model = WarpModel::Linear { vx, vy, t_ref };
        model.validate()?;
        Ok(model)
    }
}

/// Image of warped events: per-pixel event counts with unit weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelHistogram {
    geometry: SensorGeometry,
    counts: Vec<u32>,
    total: u64,
    discarded: u64,
}

impl PixelHistogram {
    pub fn empty(geometry: SensorGeometry) -> Self {
        Self { geometry, counts: vec![0; geometry.pixel_count()], total: 0, discarded: 0 }
    }

    /// Histogram with explicit counts laid out row-major.
    pub fn from_counts(geometry: SensorGeometry, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != geometry.pixel_count() {
            return Err(Error::invalid(format!(
                "{} counts for a {geometry} sensor ({} pixels)",
                counts.len(),
                geometry.pixel_count()
            )));
        }
        let total = counts.iter().map(|&c| c as u64).sum();
        Ok(Self { geometry, counts, total, discarded: 0 })
    }

    #[inline]
    pub fn add(&mut self, x: u16, y: u16) {
        self.counts[self.geometry.index(x, y)] += 1;
        self.total += 1;
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Accumulated events `N` (excludes discarded ones).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn discarded(&self) -> u64 {
        self.discarded
    }
}

/// Projects every event along the warp to the reference time and bins it at
/// the nearest pixel. Events landing off-sensor are counted as discarded.
pub fn warp_to_iwe(packet: &EventPacket, model: &WarpModel) -> PixelHistogram {
    let g = packet.geometry();
    let mut h = PixelHistogram::empty(g);
    match *model {
        WarpModel::Identity => {
            for e in packet.events() {
                h.add(e.x, e.y);
            }
        }
        WarpModel::Linear { vx, vy, t_ref } => {
            let t_ref = match t_ref {
                RefTime::Absolute(t) => t,
                RefTime::PacketStart => packet.time_span().map_or(0, |(t0, _)| t0),
            };
            let (w, hgt) = (g.width as f64, g.height as f64);
            for e in packet.events() {
                let dt = (e.t as f64 - t_ref as f64) * 1e-6;
                let x = (e.x as f64 - vx * dt).round();
                let y = (e.y as f64 - vy * dt).round();
                if x >= 0.0 && x < w && y >= 0.0 && y < hgt {
                    h.add(x as u16, y as u16);
                } else {
                    h.discarded += 1;
                }
            }
        }
    }
    h
}
