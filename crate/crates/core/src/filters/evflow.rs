use serde::{Deserialize, Serialize};

use super::{within, StreamingFilter, TimestampMap};
use crate::event::{Event, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvFlowConfig {
    pub radius: u16,
    pub dt_us: u64,
    pub min_neighbors: usize,
    pub residual_threshold_us: f64,
}

impl Default for EvFlowConfig {
    fn default() -> Self {
        Self { radius: 3, dt_us: 10_000, min_neighbors: 4, residual_threshold_us: 1_000.0 }
    }
}

/// Least-squares plane `t = a·x + b·y + c` through `(x, y, t)` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mean_abs_residual: f64,
}

/// Relative tolerance under which the spatial scatter matrix is treated as
/// singular (samples on a line or a single point).
const DEGENERATE_TOL: f64 = 1e-9;

/// `None` for fewer than three samples or collinear supports.
pub fn fit_plane(samples: &[(f64, f64, f64)]) -> Option<PlaneFit> {
    if samples.len() < 3 {
        return None;
    }
    let n = samples.len() as f64;
    let (mx, my, mt) = samples.iter().fold((0.0, 0.0, 0.0), |(sx, sy, st), &(x, y, t)| (sx + x, sy + y, st + t));
    let (mx, my, mt) = (mx / n, my / n, mt / n);
    let (mut sxx, mut sxy, mut syy, mut sxt, mut syt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, t) in samples {
        let (dx, dy, dt) = (x - mx, y - my, t - mt);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxt += dx * dt;
        syt += dy * dt;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = (sxx + syy) * (sxx + syy);
    if scale == 0.0 || det <= DEGENERATE_TOL * scale {
        return None;
    }
    let a = (sxt * syy - syt * sxy) / det;
    let b = (syt * sxx - sxt * sxy) / det;
    let c = mt - a * mx - b * my;
    let mean_abs_residual = samples.iter().map(|&(x, y, t)| (t - (a * x + b * y + c)).abs()).sum::<f64>() / n;
    Some(PlaneFit { a, b, c, mean_abs_residual })
}

/// Local plane-fit flow filter. The incoming event and every neighbour pixel
/// (square of `radius`) that fired within `dt_us` form the support; the event
/// survives when the support has at least `min_neighbors` neighbours and a
/// non-degenerate plane fits it with mean absolute residual within
/// `residual_threshold_us`.
#[derive(Debug, Clone)]
pub struct EvFlow {
    config: EvFlowConfig,
    last: TimestampMap,
    samples: Vec<(f64, f64, f64)>,
}

impl EvFlow {
    pub fn new(geometry: SensorGeometry, config: EvFlowConfig) -> Self {
        Self { config, last: TimestampMap::new(geometry), samples: Vec::new() }
    }
}

impl StreamingFilter for EvFlow {
    fn decide(&mut self, e: &Event) -> bool {
        let cfg = self.config;
        self.samples.clear();
        // times relative to the event keep the fit well conditioned
        self.samples.push((0.0, 0.0, 0.0));
        for (x, y, t) in self.last.neighbours(e.x, e.y, cfg.radius) {
            if let Some(t) = t.filter(|&t| within(e.t, t, cfg.dt_us)) {
                self.samples.push((x as f64 - e.x as f64, y as f64 - e.y as f64, t as f64 - e.t as f64));
            }
        }
        let keep = self.samples.len() > cfg.min_neighbors
            && fit_plane(&self.samples).is_some_and(|fit| fit.mean_abs_residual <= cfg.residual_threshold_us);
        self.last.set(e.x, e.y, e.t);
        keep
    }
}
