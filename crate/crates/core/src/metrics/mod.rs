//! Image of warped events and the structural metrics computed on it.

mod structural;
mod warp;

pub use structural::{
    esr, esr_breakdown, esr_of_histogram, l_n, mesr, ntss, spatial_support, tss, EsrBreakdown, GroupScore, MesrResult,
    MetricParams,
};
pub use warp::{warp_to_iwe, PixelHistogram, RefTime, WarpModel};
