//! `evdn` command-line interface. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{emit_report, run_benchmark, BenchmarkPlan, ReportFormat};
use crate::error::Error;
use crate::event::SensorGeometry;
use crate::filters::{apply_filter, FilterConfig, FilterId};
use crate::io::{
    generate_scene, inject_uniform_noise, read_events_file, read_raw_events_file, write_events_file, NoiseSpec,
    Pattern, SceneSpec,
};
use crate::metrics::{mesr, MetricParams, WarpModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "evdn", version, about = "Event-stream denoising and Event Structural Ratio scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a stream: MESR over fixed-size groups plus per-group ESR.
    Score {
        file: PathBuf,
        /// Reference event count M.
        #[arg(long, default_value_t = 20_000)]
        m: u64,
        /// Events per group.
        #[arg(long, default_value_t = 30_000)]
        group: usize,
        /// identity | linear:vx,vy | linear:vx,vy,tref
        #[arg(long, default_value = "identity", allow_hyphen_values = true)]
        warp: String,
    },
    /// Run one filter and write the kept events.
    Denoise {
        file: PathBuf,
        #[arg(long)]
        filter: String,
        /// Override a filter parameter, e.g. --param dt_us=1500.
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Run a benchmark plan and write the report (.json or CSV).
    Bench {
        #[arg(long)]
        plan: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Report format; defaults to the output extension.
        #[arg(long)]
        format: Option<String>,
    },
    /// Generate a synthetic translating-pattern scene.
    Synth {
        #[arg(long, value_enum, default_value_t = PatternArg::Bar)]
        pattern: PatternArg,
        /// Sensor size as WxH.
        #[arg(long, default_value = "346x260")]
        size: String,
        /// Velocity in px/s as vx,vy.
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
        /// Duration in microseconds.
        #[arg(long)]
        duration: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Contrast threshold c.
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
        /// Log-intensity of the pattern (background is 0).
        #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
        intensity: f64,
        /// Width of the boundary intensity ramp in pixels.
        #[arg(long, default_value_t = 1.0)]
        edge_width: f64,
        /// Per-pixel reference phase jitter as a fraction of c, in [0, 1].
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Add uniform background-activity noise.
    InjectNoise {
        file: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check bounds and timestamp order of an event file.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PatternArg {
    Bar,
    Disk,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

type Outcome = Result<(), Failure>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Score { file, m, group, warp } => score(file, m, group, &warp),
        Command::Denoise { file, filter, params, output } => denoise(file, &filter, &params, output),
        Command::Bench { plan, output, format } => bench(plan, output, format.as_deref()),
        Command::Synth {
            pattern,
            size,
            velocity,
            duration,
            seed,
            threshold,
            intensity,
            edge_width,
            jitter,
            output,
        } => {
            let geometry = parse_size(&size)?;
            let velocity =
                parse_pair(&velocity).ok_or_else(|| usage(format!("bad --velocity `{velocity}`, expected vx,vy")))?;
            let mut spec = SceneSpec::bar(geometry, velocity, duration);
            if let PatternArg::Disk = pattern {
                spec.pattern = Pattern::TranslatingDisk { radius: geometry.height.min(geometry.width) as f64 * 0.15 };
            }
            spec.contrast_threshold = threshold;
            spec.edge_log_intensity = intensity;
            spec.edge_width = edge_width;
            spec.reference_jitter = jitter;
            spec.validate().map_err(usage)?;
            synth(&spec, seed, output)
        }
        Command::InjectNoise { file, ratio, seed, output } => {
            let spec = NoiseSpec::new(ratio, seed).map_err(usage)?;
            let packet = read_events_file(&file)?;
            let noisy = inject_uniform_noise(&packet, &spec)?;
            write_events_file(&output, &noisy, &[format!("noise ratio={ratio} seed={seed}")])?;
            println!("added {} noise events ({} total)", noisy.len() - packet.len(), noisy.len());
            Ok(())
        }
        Command::Validate { file } => {
            let raw = read_raw_events_file(&file)?;
            let report = raw.validate();
            println!("{report}");
            if report.is_ok() {
                Ok(())
            } else {
                Err(Failure::Data(format!("{} violation(s) in {}", report.total, file.display())))
            }
        }
    }
}

fn parse_size(s: &str) -> Result<SensorGeometry, Failure> {
    let bad = || usage(format!("bad --size `{s}`, expected WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w = w.trim().parse().map_err(|_| bad())?;
    let h = h.trim().parse().map_err(|_| bad())?;
    SensorGeometry::new(w, h).map_err(usage)
}

fn parse_pair(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn score(file: PathBuf, m: u64, group: usize, warp: &str) -> Outcome {
    let params = MetricParams::new(m).map_err(usage)?;
    if group == 0 {
        return Err(usage("--group must be positive"));
    }
    let warp = WarpModel::from_str(warp).map_err(usage)?;
    let packet = read_events_file(&file)?;
    let groups = packet.slice_by_count(group, true)?;
    if groups.is_empty() {
        return Err(Failure::Data(format!("{} contains no events", file.display())));
    }
    let result = mesr(&groups, &warp, &params).map_err(|e| {
        let largest = groups.iter().map(|g| g.len()).max().unwrap_or(0);
        Failure::Data(format!(
            "{e}; every group has fewer than M = {m} events in the IWE (largest group N = {largest})"
        ))
    })?;
    println!(
        "MESR {:.6} (groups: {}, excluded: {}, M = {m}, warp = {warp})",
        result.mean,
        result.per_group.len(),
        result.excluded
    );
    println!("group,t_start,t_end,events,esr");
    for g in &result.per_group {
        let esr = g.esr.map(|v| format!("{v:.6}")).unwrap_or_default();
        println!("{},{},{},{},{}", g.index, g.t_start, g.t_end, g.events, esr);
    }
    Ok(())
}

fn denoise(file: PathBuf, filter: &str, params: &[String], output: PathBuf) -> Outcome {
    let id = FilterId::from_str(filter).map_err(usage)?;
    let mut config = FilterConfig::default_for(id);
    for kv in params {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("bad --param `{kv}`, expected key=value")))?;
        config = config.with_param(k.trim(), v.trim()).map_err(usage)?;
    }
    config.validate().map_err(usage)?;
    let packet = read_events_file(&file)?;
    let (kept, trace) = apply_filter(&packet, &config)?;
    write_events_file(&output, &kept, &[])?;
    println!("kept {} of {} events (ratio {:.6})", trace.kept_count, packet.len(), trace.kept_ratio());
    Ok(())
}

fn bench(plan_path: PathBuf, output: PathBuf, format: Option<&str>) -> Outcome {
    let format = match format {
        Some(f) => ReportFormat::from_str(f).map_err(usage)?,
        None => ReportFormat::from_path(&output),
    };
    let plan = BenchmarkPlan::load(&plan_path)?;
    let report = run_benchmark(&plan)?;
    let mut sink = BufWriter::new(File::create(&output)?);
    emit_report(&report, format, &mut sink)?;
    sink.flush()?;
    println!(
        "{} cells, {} failed input(s), report written to {}",
        report.cells.len(),
        report.failures.len(),
        output.display()
    );
    for f in &report.failures {
        eprintln!("warning: input {} failed: {}", f.input, f.error);
    }
    Ok(())
}

fn synth(spec: &SceneSpec, seed: u64, output: PathBuf) -> Outcome {
    let scene = generate_scene(spec, seed)?;
    let mut comments = scene.metadata_comments();
    comments.push(format!("scene={}", serde_json::to_string(spec).map_err(|e| Failure::Data(e.to_string()))?));
    write_events_file(&output, &scene.packet, &comments)?;
    println!("wrote {} events to {}", scene.packet.len(), output.display());
    Ok(())
}
