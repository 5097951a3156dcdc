//! `perfseg` command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on processing errors. Data
//! goes to files; progress and per-slice timing go to standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::Error;
use crate::io::{load_image, load_mask, load_study, save_mask};
use crate::metrics::{evaluate, summarize_case, EvalMetrics};
use crate::phantom::{generate_phantom, truth_file_name, write_phantom, PhantomSpec, Preset};
use crate::pipeline::{segment_slice, PipelineConfig, DEFAULT_REF_TIMEPOINT};
use crate::projection::{first_derivative, std_projection, Axis};
use crate::report::{profile_csv, segmentation_json, EvalReport, ImageRecord};
use crate::types::SegmentationResult;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PROCESSING: i32 = 2;

pub const SEGMENTATION_JSON: &str = "segmentation.json";

#[derive(Debug, Parser)]
#[command(name = "perfseg", version, about = "Perfusion ROI detection for DSC perfusion MR series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment every slice of a study.
    Segment(SegmentArgs),
    /// Compare predicted masks against reference masks.
    Eval(EvalArgs),
    /// Write a synthetic phantom study with ground-truth masks.
    Phantom(PhantomArgs),
    /// Dump standard-deviation projection profiles of one image as CSV.
    Profile(ProfileArgs),
}

#[derive(Debug, clap::Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_REF_TIMEPOINT)]
    pub ref_timepoint: usize,
    /// Also write brain masks and segmentation.json.
    #[arg(
        long,
        action = ArgAction::Set,
        num_args = 0..=1,
        default_value_t = false,
        default_missing_value = "true"
    )]
    pub emit_intermediate: bool,
    /// Worker threads: a positive integer or "auto".
    #[arg(long, env = "PERFSEG_JOBS", default_value = "auto")]
    pub jobs: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub ref_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Default,
    Lesion,
    Noiseless,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Default => Preset::Default,
            PresetArg::Lesion => Preset::Lesion,
            PresetArg::Noiseless => Preset::Noiseless,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PresetArg::Default)]
    pub preset: PresetArg,
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "256x256", value_parser = parse_size)]
    pub size: (usize, usize),
    #[arg(long, default_value_t = 40)]
    pub timepoints: usize,
    #[arg(long, default_value_t = 3)]
    pub slices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    H,
    V,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, value_enum, default_value_t = AxisArg::Both)]
    pub axis: AxisArg,
    /// Output CSV; with `--axis both` the files get `_h` and `_v` suffixes.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(w)?, parse(h)?))
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn processing(message: impl Into<String>) -> Self {
        Self { code: EXIT_PROCESSING, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::processing(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: &Command) -> CliResult {
    match command {
        Command::Segment(a) => cmd_segment(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Phantom(a) => cmd_phantom(a),
        Command::Profile(a) => cmd_profile(a),
    }
}

fn resolve_jobs(spec: &str) -> CliResult<usize> {
    if spec.eq_ignore_ascii_case("auto") {
        return Ok(std::thread::available_parallelism().map_or(1, |n| n.get()));
    }
    match spec.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(CliError::usage(format!(
            "--jobs must be a positive integer or \"auto\", got {spec:?}"
        ))),
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::processing(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::processing(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_segment(args: &SegmentArgs) -> CliResult {
    let jobs = resolve_jobs(&args.jobs)?;
    let study = load_study(&args.manifest)?;
    let t = study.timepoints();
    if t > 0 && args.ref_timepoint >= t {
        return Err(CliError::usage(format!(
            "--ref-timepoint {} out of range: the study has {t} time-points (valid 0..={})",
            args.ref_timepoint,
            t - 1
        )));
    }
    let cfg = PipelineConfig {
        ref_timepoint: args.ref_timepoint,
        ..PipelineConfig::default()
    };

    let timed = |s| {
        let start = Instant::now();
        let r = segment_slice(s, &cfg);
        (r, start.elapsed())
    };
    let outcomes: Vec<(crate::Result<SegmentationResult>, Duration)> = if jobs <= 1 {
        study.slices().iter().map(timed).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::processing(format!("cannot start worker pool: {e}")))?;
        pool.install(|| study.slices().par_iter().map(timed).collect())
    };

    create_dir(&args.out_dir)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (series, (outcome, elapsed)) in study.slices().iter().zip(outcomes) {
        let s = series.slice_index();
        eprintln!("slice {s}: {:.3} ms", elapsed.as_secs_f64() * 1e3);
        match outcome {
            Ok(r) => {
                save_mask(&r.roi_mask, args.out_dir.join(truth_file_name("roi", s)))?;
                if args.emit_intermediate {
                    save_mask(&r.brain_mask, args.out_dir.join(truth_file_name("brain", s)))?;
                }
                results.push(r);
            }
            Err(e) => failures.push(format!("slice {s}: {e}")),
        }
    }
    if args.emit_intermediate {
        write_text(&args.out_dir.join(SEGMENTATION_JSON), &segmentation_json(&results))?;
    }
    if !failures.is_empty() {
        return Err(CliError::processing(format!(
            "{} slice(s) failed:\n  {}",
            failures.len(),
            failures.join("\n  ")
        )));
    }
    Ok(())
}

/// Slice index from a `...slice{N}...` file name.
fn slice_from_name(name: &str) -> Option<usize> {
    let rest = &name[name.rfind("slice")? + "slice".len()..];
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

fn ref_timepoints(pred_dir: &Path) -> BTreeMap<usize, usize> {
    let Ok(text) = fs::read_to_string(pred_dir.join(SEGMENTATION_JSON)) else {
        return BTreeMap::new();
    };
    let Ok(doc) = serde_json::from_str::<serde_json::Value>(&text) else {
        return BTreeMap::new();
    };
    doc["slices"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|s| {
            Some((
                s["slice_index"].as_u64()? as usize,
                s["ref_timepoint"].as_u64()? as usize,
            ))
        })
        .collect()
}

/// Evaluates every `*.pgm` in `pred_dir` against the same-named file in
/// `ref_dir`.
pub fn evaluate_dirs(pred_dir: &Path, ref_dir: &Path) -> CliResult<EvalReport> {
    let entries = fs::read_dir(pred_dir)
        .map_err(|e| CliError::processing(format!("cannot read {}: {e}", pred_dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".pgm"))
        .collect();
    names.sort_by_key(|n| (slice_from_name(n), n.clone()));
    if names.is_empty() {
        return Err(CliError::processing(format!(
            "no .pgm masks in {}",
            pred_dir.display()
        )));
    }
    let refs = ref_timepoints(pred_dir);

    let mut images = Vec::with_capacity(names.len());
    for name in names {
        let ref_path = ref_dir.join(&name);
        if !ref_path.is_file() {
            return Err(CliError::processing(format!(
                "{name} has no counterpart in {}",
                ref_dir.display()
            )));
        }
        let pred = load_mask(pred_dir.join(&name))?;
        let reference = load_mask(&ref_path)?;
        let metrics = evaluate(&pred, &reference).map_err(|e| CliError::processing(format!("{name}: {e}")))?;
        let slice = slice_from_name(&name);
        images.push(ImageRecord {
            file: name,
            slice,
            timepoint_ref: slice.and_then(|s| refs.get(&s).copied()),
            metrics,
        });
    }
    let all: Vec<EvalMetrics> = images.iter().map(|r| r.metrics).collect();
    let summary = summarize_case(&all)?;
    Ok(EvalReport { images, summary })
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult {
    let report = evaluate_dirs(&args.pred_dir, &args.ref_dir)?;
    let text = match args.format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_text(&args.out, &text)
}

pub fn cmd_phantom(args: &PhantomArgs) -> CliResult {
    let (w, h) = args.size;
    let mut spec = PhantomSpec::preset(args.preset.into(), w, h, args.timepoints, args.seed);
    spec.slices = args.slices;
    let (study, truths) = generate_phantom(&spec).map_err(|e| match e {
        Error::InvalidSpec(_) => CliError::usage(e.to_string()),
        other => other.into(),
    })?;
    write_phantom(&study, &truths, &args.out_dir)?;
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

pub fn cmd_profile(args: &ProfileArgs) -> CliResult {
    let img = load_image(&args.image)?;
    let render = |axis| -> CliResult<String> {
        let p = std_projection(&img, axis);
        let d = first_derivative(&p)?;
        Ok(profile_csv(&p, &d))
    };
    match args.axis {
        AxisArg::H => write_text(&args.out, &render(Axis::Horizontal)?),
        AxisArg::V => write_text(&args.out, &render(Axis::Vertical)?),
        AxisArg::Both => {
            write_text(&suffixed(&args.out, "_h"), &render(Axis::Horizontal)?)?;
            write_text(&suffixed(&args.out, "_v"), &render(Axis::Vertical)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_parsing() {
        assert_eq!(parse_size("256x256"), Ok((256, 256)));
        assert_eq!(parse_size("8X12"), Ok((8, 12)));
        assert!(parse_size("256").is_err());
        assert!(parse_size("axb").is_err());
    }

    #[test]
    fn slice_names() {
        assert_eq!(slice_from_name("roi_slice12.pgm"), Some(12));
        assert_eq!(slice_from_name("brain_slice0.pgm"), Some(0));
        assert_eq!(slice_from_name("mask.pgm"), None);
    }

    #[test]
    fn suffix_paths() {
        assert_eq!(suffixed(Path::new("out/p.csv"), "_h"), PathBuf::from("out/p_h.csv"));
        assert_eq!(suffixed(Path::new("p"), "_v"), PathBuf::from("p_v"));
    }

    #[test]
    fn jobs_parsing() {
        assert!(resolve_jobs("auto").unwrap() >= 1);
        assert_eq!(resolve_jobs("3").unwrap(), 3);
        assert_eq!(resolve_jobs("0").unwrap_err().code, EXIT_USAGE);
        assert_eq!(resolve_jobs("many").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["perfseg", "segment", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["perfseg"]), EXIT_USAGE);
        assert_eq!(run(["perfseg", "phantom", "--out-dir", "x", "--size", "big"]), EXIT_USAGE);
    }
}
