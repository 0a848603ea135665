//! Subcommands of the `glyphalign` binary.
//!
//! Exit codes: 0 success, 1 too many failed samples, 2 input or validation
//! error, 3 numerical failure.

pub mod inspect;
pub mod request;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use glyphalign::datagen::{build_dataset, DatagenError, DatasetConfig, DatasetManifest};
use glyphalign::eval::{aggregate, parse_pairs_jsonl, MatchOptions, Normalization, PrecisionReport};
use glyphalign::pe::{build_alignment_map, Alignment, AlignmentMap, PeError};
use glyphalign::warp::WarpError;
use thiserror::Error;

pub use inspect::InspectSummary;
pub use request::{LayoutRequest, Overrides, RequestMode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Threshold(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Threshold(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_in(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Builds the alignment map for a request, writing it to `out` when given.
pub fn cmd_align(request: &Path, out: Option<&Path>, ov: &Overrides) -> Result<Alignment, CliError> {
    let req = LayoutRequest::load(request)?;
    let prepared = req.prepare(ov)?;
    let alignment = build_alignment_map(&prepared.patches, &prepared.grid, prepared.mode).map_err(|e| {
        let name = |b: usize| prepared.labels.get(b).cloned().unwrap_or_else(|| format!("box {b}"));
        match e {
            PeError::Warp { box_id, source: s @ WarpError::SingularSystem(_) } => {
                CliError::Numeric(format!("{}: {s}", name(box_id)))
            }
            PeError::Warp { box_id, source } => CliError::Input(format!("{}: {source}", name(box_id))),
            PeError::Geometry { box_id, source } => CliError::Input(format!("{}: {source}", name(box_id))),
            other => CliError::Input(other.to_string()),
        }
    })?;
    let d = &alignment.diagnostics;
    eprintln!("extrapolated condition tokens: {}", d.extrapolations);
    for o in &d.overlaps {
        eprintln!(
            "warning: {} and {} overlap ({} colliding token pairs)",
            prepared.labels[o.box_a], prepared.labels[o.box_b], o.colliding_pairs
        );
    }
    let json = alignment.map.to_json();
    match out {
        Some(p) => write_out(p, &(json + "\n"))?,
        None => println!("{json}"),
    }
    Ok(alignment)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SynthOptions {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub latent_factor: Option<u32>,
    pub fail_threshold: Option<f64>,
}

pub fn cmd_synth(config: &Path, out: &Path, opts: &SynthOptions) -> Result<DatasetManifest, CliError> {
    let input = |e: DatagenError| CliError::Input(e.to_string());
    let mut cfg = DatasetConfig::load(config).map_err(input)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(lf) = opts.latent_factor {
        cfg.latent_factor = lf;
    }
    if let Some(t) = opts.fail_threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Input(format!("fail threshold must lie in [0, 1], got {t}")));
        }
        cfg.fail_threshold = t;
    }
    let jobs = opts.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = build_dataset(&cfg, out, jobs).map_err(input)?;
    eprintln!("wrote {} of {} samples to {}", manifest.written, manifest.requested, out.display());
    for f in &manifest.failures {
        eprintln!("  sample {} ({}): {}", f.index, f.script, f.error);
    }
    if manifest.threshold_exceeded {
        return Err(CliError::Threshold(format!(
            "{} of {} samples failed, above the {:.1}% threshold",
            manifest.failed,
            manifest.requested,
            manifest.fail_threshold * 100.0
        )));
    }
    Ok(manifest)
}

pub fn cmd_eval(pairs: &Path, out: Option<&Path>, opts: &MatchOptions) -> Result<PrecisionReport, CliError> {
    let text = read_in(pairs)?;
    let parsed = parse_pairs_jsonl(&text).map_err(|e| CliError::Input(format!("{}: {e}", pairs.display())))?;
    let report = aggregate(&parsed, opts).map_err(|e| CliError::Input(format!("{}: {e}", pairs.display())))?;
    print!("{}", report.table());
    if let Some(p) = out {
        write_out(p, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    }
    Ok(report)
}

/// Summarizes a map file. With `request`, condition tokens are checked
/// against the regions it declares.
pub fn cmd_inspect(
    map: &Path,
    png: Option<&Path>,
    request: Option<&Path>,
    latent_factor: Option<u32>,
) -> Result<InspectSummary, CliError> {
    let text = read_in(map)?;
    let parsed = AlignmentMap::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", map.display())))?;
    let regions = match request {
        Some(r) => {
            let ov = Overrides { latent_factor, ..Default::default() };
            Some(LayoutRequest::load(r)?.prepare(&ov)?.regions)
        }
        None => None,
    };
    let summary = inspect::summarize(&parsed, regions.as_deref());
    print!("{}", summary.text());
    if let Some(p) = png {
        inspect::render_scatter(&parsed)
            .save(p)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(summary)
}

#[derive(Parser)]
#[command(name = "glyphalign", version, about = "Glyph-to-token positional alignment tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an alignment map from a layout request.
    Align {
        /// Layout request JSON.
        request: PathBuf,
        /// Map JSON destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the request's mode.
        #[arg(long, value_enum)]
        mode: Option<RequestMode>,
        /// Pixels per token edge.
        #[arg(long)]
        latent_factor: Option<u32>,
        /// TPS smoothing weight.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Generate a synthetic dataset from a config file.
    Synth {
        /// Dataset config JSON.
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; output does not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        latent_factor: Option<u32>,
        /// Largest tolerated fraction of failed samples.
        #[arg(long)]
        fail_threshold: Option<f64>,
    },
    /// Score transcript pairs.
    Eval {
        /// JSONL of {"gt", "pred", "lang", "box"} records.
        pairs: PathBuf,
        /// Report JSON destination.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "none")]
        normalize: NormalizeArg,
        #[arg(long)]
        trim_trailing_whitespace: bool,
    },
    /// Summarize an alignment map and optionally plot it.
    Inspect {
        /// Map JSON written by `align`.
        map: PathBuf,
        /// PNG scatter plot destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Request whose declared regions the map is checked against.
        #[arg(long)]
        request: Option<PathBuf>,
        #[arg(long)]
        latent_factor: Option<u32>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum NormalizeArg {
    None,
    Nfc,
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Align { request, out, mode, latent_factor, lambda } => {
            cmd_align(&request, out.as_deref(), &Overrides { mode, latent_factor, lambda }).map(drop)
        }
        Command::Synth { config, out, seed, jobs, latent_factor, fail_threshold } => {
            cmd_synth(&config, &out, &SynthOptions { seed, jobs, latent_factor, fail_threshold }).map(drop)
        }
        Command::Eval { pairs, out, normalize, trim_trailing_whitespace } => {
            let normalization = match normalize {
                NormalizeArg::None => Normalization::None,
                NormalizeArg::Nfc => Normalization::Nfc,
            };
            cmd_eval(&pairs, out.as_deref(), &MatchOptions { normalization, trim_trailing_whitespace }).map(drop)
        }
        Command::Inspect { map, out, request, latent_factor } => {
            cmd_inspect(&map, out.as_deref(), request.as_deref(), latent_factor).map(drop)
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
