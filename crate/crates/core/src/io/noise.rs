use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, EventPacket, Polarity};

/// Uniform background-activity injection: `ratio · N` extra events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ratio: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(Error::invalid(format!("noise ratio must be finite and >= 0, got {ratio}")));
        }
        Ok(Self { ratio, seed })
    }

    pub fn noise_count(&self, n: usize) -> usize {
        (self.ratio * n as f64).round() as usize
    }
}

/// Adds `round(ratio·N)` events uniform over the sensor, the packet's own
/// `[t_first, t_last]` span and both polarities. Original events are kept
/// as-is; on equal timestamps they precede injected ones.
///
/// Randomness comes from ChaCha8 seeded with `spec.seed`, so results are
/// identical across platforms.
pub fn inject_uniform_noise(packet: &EventPacket, spec: &NoiseSpec) -> Result<EventPacket> {
    NoiseSpec::new(spec.ratio, spec.seed)?;
    if packet.is_empty() && spec.ratio > 0.0 {
        return Err(Error::invalid("cannot inject proportional noise into an empty packet"));
    }
    let count = spec.noise_count(packet.len());
    let Some((t0, t1)) = packet.time_span().filter(|_| count > 0) else {
        return Ok(packet.clone());
    };
    let g = packet.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise: Vec<Event> = (0..count)
        .map(|_| {
            let x = rng.gen_range(0..g.width);
            let y = rng.gen_range(0..g.height);
            let t = rng.gen_range(t0..=t1);
            let p = if rng.gen::<bool>() { Polarity::On } else { Polarity::Off };
            Event::new(x, y, t, p)
        })
        .collect();
    noise.sort_by_key(|e| e.t);

    let original = packet.events();
    let mut merged = Vec::with_capacity(original.len() + noise.len());
    let (mut i, mut j) = (0, 0);
    while i < original.len() && j < noise.len() {
        if original[i].t <= noise[j].t {
            merged.push(original[i]);
            i += 1;
        } else {
            merged.push(noise[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&original[i..]);
    merged.extend_from_slice(&noise[j..]);
    Ok(EventPacket::new_unchecked(g, merged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::SensorGeometry;

    fn base(n: usize) -> EventPacket {
        let g = SensorGeometry::new(64, 48).unwrap();
        let events =
            (0..n).map(|i| Event::new((i % 64) as u16, (i / 64 % 48) as u16, i as u64 * 10, Polarity::On)).collect();
        EventPacket::new(g, events).unwrap()
    }

    fn is_subsequence(small: &[Event], big: &[Event]) -> bool {
        let mut it = big.iter();
        small.iter().all(|e| it.any(|b| b == e))
    }

    #[test]
    fn adds_rounded_fraction() {
        let p = base(1000);
        let noisy = inject_uniform_noise(&p, &NoiseSpec::new(0.2, 7).unwrap()).unwrap();
        assert_eq!(noisy.len(), 1200);
        assert!(noisy.validate().is_ok());
        assert!(is_subsequence(p.events(), noisy.events()));
    }

    #[test]
    fn zero_ratio_is_identity() {
        let p = base(1000);
        assert_eq!(inject_uniform_noise(&p, &NoiseSpec::new(0.0, 1).unwrap()).unwrap(), p);
    }

    #[test]
    fn noise_levels_scale_counts() {
        let p = base(1000);
        let counts: Vec<_> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&r| inject_uniform_noise(&p, &NoiseSpec::new(r, 3).unwrap()).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1100, 1200, 1400]);
    }

    #[test]
    fn deterministic_in_seed() {
        let p = base(500);
        let a = inject_uniform_noise(&p, &NoiseSpec::new(0.3, 11).unwrap()).unwrap();
        let b = inject_uniform_noise(&p, &NoiseSpec::new(0.3, 11).unwrap()).unwrap();
        let c = inject_uniform_noise(&p, &NoiseSpec::new(0.3, 12).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_stays_in_span() {
        let p = base(300);
        let (t0, t1) = p.time_span().unwrap();
        let noisy = inject_uniform_noise(&p, &NoiseSpec::new(1.0, 5).unwrap()).unwrap();
        assert!(noisy.events().iter().all(|e| e.t >= t0 && e.t <= t1));
    }

    #[test]
    fn rejects_bad_ratio_and_empty_packet() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
        assert!(NoiseSpec::new(f64::NAN, 0).is_err());
        let empty = EventPacket::empty(SensorGeometry::new(4, 4).unwrap());
        assert!(inject_uniform_noise(&empty, &NoiseSpec { ratio: 0.5, seed: 0 }).is_err());
    }
}
