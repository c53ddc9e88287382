#![allow(dead_code)]

use evdn::io::{generate_scene, inject_uniform_noise, NoiseSpec, Pattern, SceneSpec};
use evdn::metrics::{mesr, MetricParams, WarpModel};
use evdn::{Event, EventPacket, Polarity, SensorGeometry};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STANDARD_VELOCITY: f64 = 400.0;
pub const STANDARD_GROUP: usize = 30_000;
pub const STANDARD_M: u64 = 20_000;
pub const NOISE_LEVELS: [f64; 4] = [0.0, 0.1, 0.2, 0.4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Full-height bar on 640x480 with a 10 px ramp and 17 thresholds of
/// contrast, sweeping at 400 px/s for 100 ms.
pub fn standard_scene() -> SceneSpec {
    let g = SensorGeometry::new(640, 480).unwrap();
    let mut spec = SceneSpec::bar(g, (STANDARD_VELOCITY, 0.0), 100_000);
    spec.pattern = Pattern::TranslatingBar { width: 40.0, length: 480.0 };
    spec.edge_width = 10.0;
    spec.edge_log_intensity = 17.0 * spec.contrast_threshold;
    spec
}

pub fn standard_warp() -> WarpModel {
    WarpModel::linear(STANDARD_VELOCITY, 0.0)
}

pub fn standard_clean(seed: u64) -> EventPacket {
    generate_scene(&standard_scene(), seed).unwrap().packet
}

/// Noise for scene seed `seed` is drawn with seed `seed + 7`.
pub fn with_noise(clean: &EventPacket, seed: u64, rho: f64) -> EventPacket {
    inject_uniform_noise(clean, &NoiseSpec::new(rho, seed + 7).unwrap()).unwrap()
}

pub fn standard_mesr(packet: &EventPacket, warp: &WarpModel) -> f64 {
    let groups = packet.slice_by_count(STANDARD_GROUP, false).unwrap();
    mesr(&groups, warp, &MetricParams::new(STANDARD_M).unwrap()).unwrap().mean
}

pub const INVARIANCE_VELOCITY: f64 = 2000.0;

/// Faster, jittered bar used for the count-invariance check.
pub fn invariance_scene() -> SceneSpec {
    let g = SensorGeometry::new(640, 480).unwrap();
    let mut spec = SceneSpec::bar(g, (INVARIANCE_VELOCITY, 0.0), 50_000);
    spec.pattern = Pattern::TranslatingBar { width: 40.0, length: 480.0 };
    spec.edge_width = 12.0;
    spec.edge_log_intensity = 2.0 * spec.contrast_threshold;
    spec.reference_jitter = 1.0;
    spec
}

/// True for events of `noisy` that came from `clean`. Injected events never
/// displace originals that share their timestamp.
pub fn signal_labels(clean: &EventPacket, noisy: &EventPacket) -> Vec<bool> {
    let s = clean.events();
    let mut j = 0;
    noisy
        .events()
        .iter()
        .map(|e| {
            if j < s.len() && s[j] == *e {
                j += 1;
                true
            } else {
                false
            }
        })
        .collect()
}

/// Sorted packet with up to `max_n` events on a random sensor.
pub fn random_packet(rng: &mut ChaCha8Rng, max_n: usize, max_side: u16) -> EventPacket {
    let g = SensorGeometry::new(rng.gen_range(1..=max_side), rng.gen_range(1..=max_side)).unwrap();
    let n = rng.gen_range(0..=max_n);
    let mut t = rng.gen_range(0..1_000_000u64);
    let events = (0..n)
        .map(|_| {
            t += rng.gen_range(0..200);
            let p = if rng.gen() { Polarity::On } else { Polarity::Off };
            Event::new(rng.gen_range(0..g.width), rng.gen_range(0..g.height), t, p)
        })
        .collect();
    EventPacket::new(g, events).unwrap()
}

/// Proptest strategy for sorted in-bounds packets.
pub fn arb_packet(max_n: usize, max_side: u16) -> impl Strategy<Value = EventPacket> {
    (1..=max_side, 1..=max_side, 0u64..u64::MAX / 2).prop_flat_map(move |(w, h, t0)| {
        let ev = (0..w, 0..h, 0u64..5_000, any::<bool>());
        proptest::collection::vec(ev, 0..=max_n).prop_map(move |raw| {
            let g = SensorGeometry::new(w, h).unwrap();
            let mut t = t0;
            let events = raw
                .into_iter()
                .map(|(x, y, dt, on)| {
                    t += dt;
                    Event::new(x, y, t, if on { Polarity::On } else { Polarity::Off })
                })
                .collect();
            EventPacket::new(g, events).unwrap()
        })
    })
}
