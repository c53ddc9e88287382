use crate::event::EventPacket;

pub const DEFAULT_HOT_PIXEL_SIGMA: f64 = 5.0;

/// Pixels flagged as hot, with the statistics that flagged them.
#[derive(Debug, Clone, PartialEq)]
pub struct HotPixelReport {
    pub flagged: Vec<(u16, u16)>,
    pub mean: f64,
    pub stddev: f64,
    pub threshold: f64,
}

/// Flags pixels whose event count exceeds `mean + sigma_k·stddev`, with the
/// statistics taken over pixels that fired at least once, and drops every
/// event on a flagged pixel.
pub fn remove_hot_pixels(packet: &EventPacket, sigma_k: f64) -> (EventPacket, HotPixelReport) {
    let g = packet.geometry();
    let mut counts = vec![0u64; g.pixel_count()];
    for e in packet.events() {
        counts[g.index(e.x, e.y)] += 1;
    }
    let active: Vec<f64> = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
    if active.is_empty() {
        let report = HotPixelReport { flagged: Vec::new(), mean: 0.0, stddev: 0.0, threshold: f64::INFINITY };
        return (packet.clone(), report);
    }
    let n = active.len() as f64;
    let mean = active.iter().sum::<f64>() / n;
    let var = active.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    let stddev = var.sqrt();
    let threshold = mean + sigma_k * stddev;

    let hot: Vec<bool> = counts.iter().map(|&c| c > 0 && c as f64 > threshold).collect();
    let flagged = hot.iter().enumerate().filter(|(_, &h)| h).map(|(i, _)| g.coords(i)).collect();
    let kept = packet.events().iter().filter(|e| !hot[g.index(e.x, e.y)]).copied().collect();
    (EventPacket::new_unchecked(g, kept), HotPixelReport { flagged, mean, stddev, threshold })
}
