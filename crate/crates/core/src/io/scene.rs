//! Synthetic DVS scenes from the contrast-threshold model.
//!
//! A bright pattern (bar or disk) translates over a uniform background and
//! wraps around the sensor edges, so the event process is stationary. Each
//! pixel samples its log-intensity every `step_us` and fires one event per
//! threshold crossing: whenever `|L(t) - L_ref| >= c`, an event of polarity
//! `sign(L(t) - L_ref)` is emitted and `L_ref` moves by `±c`. Event times are
//! linearly interpolated inside the sampling step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, EventPacket, Polarity, SensorGeometry};

pub const DEFAULT_STEP_US: u64 = 100;

/// Relative slack on the threshold test so that a contrast of exactly `k·c`
/// yields `k` events despite rounding.
const THRESHOLD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Pattern {
    /// Rectangle whose thin side (`width`) lies along the direction of motion.
    TranslatingBar {
        width: f64,
        length: f64,
    },
    TranslatingDisk {
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub geometry: SensorGeometry,
    pub duration_us: u64,
    pub pattern: Pattern,
    /// Pixels per second.
    pub velocity: (f64, f64),
    pub contrast_threshold: f64,
    pub background_log_intensity: f64,
    pub edge_log_intensity: f64,
    /// Width in pixels of the linear intensity ramp at the pattern boundary;
    /// 0 gives a hard edge.
    #[serde(default = "default_edge_width")]
    pub edge_width: f64,
    #[serde(default = "default_step")]
    pub step_us: u64,
    /// Pattern centre at t = 0; drawn from the seed when absent.
    #[serde(default)]
    pub start: Option<(f64, f64)>,
    /// Each pixel's initial reference level is `L(x, 0) - u·reference_jitter·c`
    /// with `u` uniform in `[0, 1)` drawn from the seed, so pixels sit at
    /// different phases of the threshold lattice as on a sensor that was
    /// already running. 0 starts every pixel exactly at its intensity.
    #[serde(default)]
    pub reference_jitter: f64,
}

fn default_edge_width() -> f64 {
    1.0
}

fn default_step() -> u64 {
    DEFAULT_STEP_US
}

impl SceneSpec {
    /// A vertical bar sweeping horizontally, the usual test fixture shape.
    pub fn bar(geometry: SensorGeometry, velocity: (f64, f64), duration_us: u64) -> Self {
        Self {
            geometry,
            duration_us,
            pattern: Pattern::TranslatingBar { width: 8.0, length: geometry.height as f64 * 0.6 },
            velocity,
            contrast_threshold: 0.2,
            background_log_intensity: 0.0,
            edge_log_intensity: 0.4,
            edge_width: default_edge_width(),
            step_us: DEFAULT_STEP_US,
            start: None,
            reference_jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (vx, vy) = self.velocity;
        if !(vx.is_finite() && vy.is_finite()) || vx.abs() + vy.abs() == 0.0 {
            return Err(Error::invalid("scene velocity must be finite and non-zero"));
        }
        if !(self.contrast_threshold.is_finite() && self.contrast_threshold > 0.0) {
            return Err(Error::invalid("contrast threshold must be positive"));
        }
        if !(self.background_log_intensity.is_finite() && self.edge_log_intensity.is_finite()) {
            return Err(Error::invalid("log intensities must be finite"));
        }
        if !(self.edge_width.is_finite() && self.edge_width >= 0.0) {
            return Err(Error::invalid("edge width must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.reference_jitter) {
            return Err(Error::invalid("reference jitter must lie in [0, 1]"));
        }
        if self.step_us == 0 {
            return Err(Error::invalid("simulation step must be at least 1 us"));
        }
        let ok = match self.pattern {
            Pattern::TranslatingBar { width, length } => width > 0.0 && length > 0.0,
            Pattern::TranslatingDisk { radius } => radius > 0.0,
        };
        if !ok {
            return Err(Error::invalid("pattern dimensions must be positive"));
        }
        Ok(())
    }

    /// Sample times `0, step, 2·step, …` up to and including `duration_us`.
    pub fn sample_times(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.duration_us / self.step_us).map(move |k| k * self.step_us)
    }

    pub(crate) fn field(&self, start: (f64, f64)) -> IntensityField {
        let (vx, vy) = self.velocity;
        let speed = vx.hypot(vy);
        IntensityField {
            geometry: self.geometry,
            start,
            velocity: self.velocity,
            along: (vx / speed, vy / speed),
            pattern: self.pattern,
            edge_width: self.edge_width,
            l0: self.background_log_intensity,
            l1: self.edge_log_intensity,
        }
    }

    fn initial_references(&self, field: &IntensityField, seed: u64) -> Vec<f64> {
        let g = self.geometry;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let spread = self.reference_jitter * self.contrast_threshold;
        (0..g.pixel_count())
            .map(|i| {
                let (x, y) = g.coords(i);
                let l = field.log_intensity(x, y, 0);
                if spread > 0.0 {
                    l - spread * rng.gen::<f64>()
                } else {
                    l
                }
            })
            .collect()
    }

    fn resolve_start(&self, seed: u64) -> (f64, f64) {
        self.start.unwrap_or_else(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (rng.gen_range(0.0..self.geometry.width as f64), rng.gen_range(0.0..self.geometry.height as f64))
        })
    }
}

/// Closed-form log-intensity of the moving pattern.
#[derive(Debug, Clone)]
pub struct IntensityField {
    geometry: SensorGeometry,
    start: (f64, f64),
    velocity: (f64, f64),
    along: (f64, f64),
    pattern: Pattern,
    edge_width: f64,
    l0: f64,
    l1: f64,
}

fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

impl IntensityField {
    pub fn centre(&self, t_us: u64) -> (f64, f64) {
        let s = t_us as f64 * 1e-6;
        (self.start.0 + self.velocity.0 * s, self.start.1 + self.velocity.1 * s)
    }

    /// Signed distance from pixel centre to the pattern boundary (negative
    /// inside), using the nearest periodic image of the pattern.
    fn signed_distance(&self, px: f64, py: f64, centre: (f64, f64)) -> f64 {
        let dx = wrap(px - centre.0, self.geometry.width as f64);
        let dy = wrap(py - centre.1, self.geometry.height as f64);
        match self.pattern {
            Pattern::TranslatingDisk { radius } => dx.hypot(dy) - radius,
            Pattern::TranslatingBar { width, length } => {
                let a = (dx * self.along.0 + dy * self.along.1).abs() - width / 2.0;
                let b = (-dx * self.along.1 + dy * self.along.0).abs() - length / 2.0;
                a.max(0.0).hypot(b.max(0.0)) + a.max(b).min(0.0)
            }
        }
    }

    fn coverage(&self, sd: f64) -> f64 {
        if self.edge_width == 0.0 {
            if sd <= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (0.5 - sd / self.edge_width).clamp(0.0, 1.0)
        }
    }

    pub fn log_intensity_at(&self, x: u16, y: u16, centre: (f64, f64)) -> f64 {
        let cov = self.coverage(self.signed_distance(x as f64, y as f64, centre));
        self.l0 + (self.l1 - self.l0) * cov
    }

    pub fn log_intensity(&self, x: u16, y: u16, t_us: u64) -> f64 {
        self.log_intensity_at(x, y, self.centre(t_us))
    }

    /// Half extents of a box containing every pixel whose intensity differs
    /// from the background.
    fn reach(&self) -> (f64, f64) {
        let pad = self.edge_width / 2.0 + 1.0;
        match self.pattern {
            Pattern::TranslatingDisk { radius } => (radius + pad, radius + pad),
            Pattern::TranslatingBar { width, length } => {
                let (ux, uy) = self.along;
                let (hw, hl) = (width / 2.0, length / 2.0);
                (ux.abs() * hw + uy.abs() * hl + pad, uy.abs() * hw + ux.abs() * hl + pad)
            }
        }
    }
}

/// Integer coordinates within `[c - r, c + r]`, wrapped onto `0..n`, each
/// listed once.
fn wrapped_range(c: f64, r: f64, n: u16) -> Vec<u16> {
    let lo = (c - r).floor() as i64;
    let hi = (c + r).ceil() as i64;
    if hi - lo + 1 >= n as i64 {
        return (0..n).collect();
    }
    (lo..=hi).map(|v| v.rem_euclid(n as i64) as u16).collect()
}

/// Generated events plus the simulation metadata needed to replay them.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub packet: EventPacket,
    pub step_us: u64,
    pub start: (f64, f64),
    pub seed: u64,
}

impl GeneratedScene {
    pub fn metadata_comments(&self) -> Vec<String> {
        vec![
            format!("step_us={}", self.step_us),
            format!("start={:.6},{:.6}", self.start.0, self.start.1),
            format!("seed={}", self.seed),
        ]
    }
}

/// Simulates the scene and emits threshold-crossing events sorted by time.
/// The seed picks the starting position when `spec.start` is unset and the
/// per-pixel reference phases when `spec.reference_jitter` is positive.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<GeneratedScene> {
    spec.validate()?;
    let start = spec.resolve_start(seed);
    let field = spec.field(start);
    let g = spec.geometry;
    let c = spec.contrast_threshold;
    let trigger = c * (1.0 - THRESHOLD_SLACK);

    let mut level: Vec<f64> = (0..g.pixel_count())
        .map(|i| {
            let (x, y) = g.coords(i);
            field.log_intensity(x, y, 0)
        })
        .collect();
    let mut reference = spec.initial_references(&field, seed);

    let (rx, ry) = field.reach();
    let motion = (spec.velocity.0.abs(), spec.velocity.1.abs());
    let step = spec.step_us;
    let mut events = Vec::new();
    let mut prev_centre = field.centre(0);

    for t in spec.sample_times().skip(1) {
        let centre = field.centre(t);
        let t_prev = t - step;
        // the support moved from prev_centre to centre: cover both
        let mid = ((prev_centre.0 + centre.0) / 2.0, (prev_centre.1 + centre.1) / 2.0);
        let drift = (motion.0 * step as f64 * 1e-6, motion.1 * step as f64 * 1e-6);
        let xs = wrapped_range(mid.0, rx + drift.0, g.width);
        let ys = wrapped_range(mid.1, ry + drift.1, g.height);
        for &y in &ys {
            for &x in &xs {
                let i = g.index(x, y);
                let before = level[i];
                let now = field.log_intensity_at(x, y, centre);
                level[i] = now;
                if now == before {
                    continue;
                }
                let r = &mut reference[i];
                loop {
                    let diff = now - *r;
                    let p = if diff >= trigger {
                        Polarity::On
                    } else if -diff >= trigger {
                        Polarity::Off
                    } else {
                        break;
                    };
                    let crossing = *r + c * p.sign() as f64;
                    let frac = ((crossing - before) / (now - before)).clamp(0.0, 1.0);
                    let dt = ((frac * step as f64).round() as u64).clamp(1, step);
                    events.push(Event::new(x, y, t_prev + dt, p));
                    *r = crossing;
                }
            }
        }
        prev_centre = centre;
    }

    events.sort_by_key(|e| e.t);
    Ok(GeneratedScene { packet: EventPacket::new(g, events)?, step_us: step, start, seed })
}

/// Replays the sampled intensity field against a generated packet and checks
/// the trigger rule per pixel: each event fires only when the accumulated
/// change since the previous event reaches `c` with the event's sign, and no
/// crossing is left unreported at any sample.
pub fn replay_trigger_rule(spec: &SceneSpec, scene: &GeneratedScene) -> std::result::Result<(), String> {
    let field = spec.field(scene.start);
    let g = spec.geometry;
    let c = spec.contrast_threshold;
    let slack = c * THRESHOLD_SLACK;

    let mut per_pixel: Vec<Vec<Event>> = vec![Vec::new(); g.pixel_count()];
    for e in scene.packet.events() {
        per_pixel[g.index(e.x, e.y)].push(*e);
    }

    let initial = spec.initial_references(&field, scene.seed);
    let times: Vec<u64> = spec.sample_times().collect();
    for (i, evs) in per_pixel.iter().enumerate() {
        let (x, y) = g.coords(i);
        let mut reference = initial[i];
        let mut next = 0;
        for &t in &times[1..] {
            let l = field.log_intensity(x, y, t);
            while next < evs.len() && evs[next].t <= t {
                let e = evs[next];
                let diff = l - reference;
                if diff.abs() < c - slack {
                    return Err(format!("({x},{y}) event at t={} fired with |dL|={:.6} < c", e.t, diff.abs()));
                }
                if diff.signum() as i8 != e.p.sign() {
                    return Err(format!("({x},{y}) event at t={} has polarity opposite to dL", e.t));
                }
                reference += c * e.p.sign() as f64;
                next += 1;
            }
            if (l - reference).abs() >= c - slack {
                return Err(format!("({x},{y}) missed crossing at sample t={t}"));
            }
        }
        if next != evs.len() {
            return Err(format!("({x},{y}) has {} events after the last sample", evs.len() - next));
        }
    }
    Ok(())
}
