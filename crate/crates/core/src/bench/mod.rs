//! Benchmark harness: every (input × noise level × filter) cell goes through
//! load/synthesize → inject noise → filter → group → MESR.

mod plan;
mod report;

pub use plan::{BenchmarkPlan, InputSource, PlanInput, Protocol, DEFAULT_NOISE_LEVELS};
pub use report::{emit_report, BenchmarkReport, CellReport, InputFailure, ReportFormat, RunMetadata, CSV_HEADER};

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::EventPacket;
use crate::filters::{apply_filter, FilterConfig};
use crate::io::{generate_scene, inject_uniform_noise, read_events_file, NoiseSpec};
use crate::metrics::{mesr, MetricParams};

/// Environment variable overriding the plan's worker count.
pub const THREADS_ENV: &str = "EVDN_THREADS";

/// Seed for the noise injected into input `input` at noise level `level`.
/// Every filter of that (input, level) pair sees the same noisy stream.
pub fn noise_seed(base: u64, input: usize, level: usize) -> u64 {
    base ^ ((input as u64) << 32) ^ (level as u64).wrapping_mul(0x9E37_79B9)
}

fn worker_count(plan: &BenchmarkPlan) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(plan.workers.unwrap_or(0)),
    }
}

fn load_input(input: &PlanInput, seed: u64) -> Result<EventPacket> {
    match &input.source {
        InputSource::File { path } => read_events_file(path),
        InputSource::Scene { scene, seed: own } => Ok(generate_scene(scene, own.unwrap_or(seed))?.packet),
    }
}

struct Cell<'a> {
    input: usize,
    level: usize,
    filter: &'a FilterConfig,
    noisy: &'a EventPacket,
}

fn run_cell(plan: &BenchmarkPlan, params: &MetricParams, cell: &Cell<'_>, names: &[String]) -> Result<CellReport> {
    let start = Instant::now();
    let (kept, trace) = apply_filter(cell.noisy, cell.filter)?;
    let groups = kept.slice_by_count(plan.protocol.group_size, false)?;
    let (mesr_value, per_group, excluded) = if groups.is_empty() {
        log::warn!(
            "{} / rho={} / {}: {} kept events form no complete group of {}",
            names[cell.input],
            plan.noise_levels[cell.level],
            cell.filter.id(),
            kept.len(),
            plan.protocol.group_size
        );
        (None, Vec::new(), 0)
    } else {
        match mesr(&groups, &plan.protocol.warp, params) {
            Ok(r) => (Some(r.mean), r.per_group, r.excluded),
            Err(Error::UndefinedMetric(msg)) => {
                log::warn!("{} / {}: MESR undefined: {msg}", names[cell.input], cell.filter.id());
                (None, Vec::new(), groups.len())
            }
            Err(e) => return Err(e),
        }
    };
    let wall_ms = plan.record_wall_time.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(CellReport {
        input: names[cell.input].clone(),
        noise_level: plan.noise_levels[cell.level],
        filter: cell.filter.id().name().to_string(),
        config: cell.filter.clone(),
        mesr: mesr_value,
        groups: groups.len(),
        excluded,
        per_group,
        events_in: cell.noisy.len() as u64,
        events_kept: trace.kept_count as u64,
        kept_ratio: trace.kept_ratio(),
        wall_ms,
    })
}

/// Runs every cell of the plan. Unreadable inputs are recorded as failures
/// and the run continues; the run fails only if no cell could be produced.
/// Cells run in parallel and are reported in plan order.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkReport> {
    plan.validate()?;
    let workers = worker_count(plan)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let params = MetricParams::new(plan.protocol.reference_count)?;
    let names = plan.input_names();

    pool.install(|| {
        let loaded: Vec<Result<EventPacket>> = plan.inputs.par_iter().map(|i| load_input(i, plan.seed)).collect();

        let mut failures = Vec::new();
        let mut noisy: Vec<(usize, usize, EventPacket)> = Vec::new();
        for (i, packet) in loaded.into_iter().enumerate() {
            let packet = match packet {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("input {} failed: {e}", names[i]);
                    failures.push(InputFailure { input: names[i].clone(), error: e.to_string() });
                    continue;
                }
            };
            for (j, &rho) in plan.noise_levels.iter().enumerate() {
                let spec = NoiseSpec::new(rho, noise_seed(plan.seed, i, j))?;
                match inject_uniform_noise(&packet, &spec) {
                    Ok(p) => noisy.push((i, j, p)),
                    Err(e) => {
                        failures.push(InputFailure { input: names[i].clone(), error: e.to_string() });
                        break;
                    }
                }
            }
        }
        // an input whose noise injection failed contributes no cells at all
        noisy.retain(|(i, _, _)| !failures.iter().any(|f| f.input == names[*i]));

        let cells: Vec<Cell<'_>> = noisy
            .iter()
            .flat_map(|(i, j, p)| plan.filters.iter().map(move |f| Cell { input: *i, level: *j, filter: f, noisy: p }))
            .collect();
        let reports: Vec<CellReport> =
            cells.par_iter().map(|c| run_cell(plan, &params, c, &names)).collect::<Result<_>>()?;

        if reports.is_empty() {
            let detail: Vec<String> = failures.iter().map(|f| format!("{}: {}", f.input, f.error)).collect();
            return Err(Error::invalid(format!("every benchmark cell failed ({})", detail.join("; "))));
        }
        Ok(BenchmarkReport { metadata: RunMetadata::for_plan(plan), cells: reports, failures })
    })
}
