//! Event Structural Ratio.
//!
//! For an IWE with counts `n_i` over `K` pixels and `N = Σ n_i`:
//!
//! * `NTSS = Σ n_i(n_i - 1) / (N(N - 1))`, the probability that two events
//!   drawn without replacement share a pixel;
//! * `L_N = K - Σ (1 - M/N)^{n_i}`, the spatial support interpolated to a
//!   fixed reference count `M` (with `0^0 = 1`);
//! * `ESR = sqrt(NTSS · L_N)`.
//!
//! MESR averages ESR over fixed-size event groups.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::warp::{warp_to_iwe, PixelHistogram, WarpModel};
use crate::error::{Error, Result};
use crate::event::EventPacket;

/// Reference event count `M`. `K` always comes from the full sensor geometry
/// of the histogram being scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricParams {
    pub reference_count: u64,
}

impl MetricParams {
    pub fn new(reference_count: u64) -> Result<Self> {
        if reference_count < 2 {
            return Err(Error::invalid(format!("reference count M must be >= 2, got {reference_count}")));
        }
        Ok(Self { reference_count })
    }
}

pub fn tss(h: &PixelHistogram) -> u64 {
    h.counts().iter().map(|&n| n as u64 * n as u64).sum()
}

pub fn spatial_support(h: &PixelHistogram) -> u64 {
    h.counts().iter().filter(|&&n| n > 0).count() as u64
}

pub fn ntss(h: &PixelHistogram) -> Result<f64> {
    let n = h.total();
    if n < 2 {
        return Err(Error::UndefinedMetric(format!("NTSS needs N >= 2 events, got {n}")));
    }
    let pairs: u64 = h.counts().iter().map(|&c| c as u64 * (c as u64).saturating_sub(1)).sum();
    Ok(pairs as f64 / (n as f64 * (n - 1) as f64))
}

pub fn l_n(h: &PixelHistogram, params: &MetricParams) -> Result<f64> {
    let n = h.total();
    let m = params.reference_count;
    if n == 0 {
        return Err(Error::UndefinedMetric("L_N of an empty histogram".into()));
    }
    if n < m {
        return Err(Error::UndefinedMetric(format!("L_N needs N >= M, got N = {n} < M = {m}")));
    }
    let alpha = 1.0 - m as f64 / n as f64;
    // zero-count pixels contribute 1 - alpha^0 = 0, so sum over active ones
    Ok(h.counts().iter().filter(|&&c| c > 0).map(|&c| 1.0 - alpha.powi(c as i32)).sum())
}

/// Both factors of the score, kept for reports and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsrBreakdown {
    pub ntss: f64,
    pub l_n: f64,
    pub esr: f64,
    /// Events that landed in the IWE.
    pub effective_count: u64,
    pub discarded: u64,
}

pub fn esr_of_histogram(h: &PixelHistogram, params: &MetricParams) -> Result<EsrBreakdown> {
    let ntss = ntss(h)?;
    let l_n = l_n(h, params)?;
    Ok(EsrBreakdown { ntss, l_n, esr: (ntss * l_n).sqrt(), effective_count: h.total(), discarded: h.discarded() })
}

pub fn esr_breakdown(packet: &EventPacket, model: &WarpModel, params: &MetricParams) -> Result<EsrBreakdown> {
    esr_of_histogram(&warp_to_iwe(packet, model), params)
}

pub fn esr(packet: &EventPacket, model: &WarpModel, params: &MetricParams) -> Result<f64> {
    esr_breakdown(packet, model, params).map(|b| b.esr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub index: usize,
    pub t_start: u64,
    pub t_end: u64,
    pub events: u64,
    /// `None` when the group was excluded.
    pub esr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MesrResult {
    pub mean: f64,
    pub per_group: Vec<GroupScore>,
    pub excluded: usize,
}

impl MesrResult {
    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_group.iter().filter_map(|g| g.esr)
    }
}

/// Mean ESR over the groups whose effective count reaches `M`. Groups are
/// scored in parallel and reduced in input order.
pub fn mesr(groups: &[EventPacket], model: &WarpModel, params: &MetricParams) -> Result<MesrResult> {
    let per_group: Vec<GroupScore> = groups
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            let (t_start, t_end) = g.time_span().unwrap_or((0, 0));
            let esr = match esr(g, model, params) {
                Ok(v) => Some(v),
                Err(e) => {
                    log::warn!("group {index} excluded from MESR: {e}");
                    None
                }
            };
            GroupScore { index, t_start, t_end, events: g.len() as u64, esr }
        })
        .collect();
    let valid: Vec<f64> = per_group.iter().filter_map(|g| g.esr).collect();
    if valid.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "all {} groups excluded (effective N < M = {})",
            groups.len(),
            params.reference_count
        )));
    }
    let mean = valid.iter().sum::<f64>() / valid.len() as f64;
    Ok(MesrResult { mean, excluded: per_group.len() - valid.len(), per_group })
}
