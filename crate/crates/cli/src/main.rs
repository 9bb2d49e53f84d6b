//! `has`: Hide-and-Seek augmentation, CAM localization and evaluation.
//!
//! Exit codes: 0 success, 1 invalid arguments or inputs that fail validation,
//! 2 I/O or file-format errors. Diagnostics go to stderr, data to stdout or
//! the file named by `--out`/`--output`.

mod commands;
mod imageio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

/// Library errors about malformed files map to exit code 2, the rest to 1.
impl From<has_core::Error> for Failure {
    fn from(e: has_core::Error) -> Self {
        use has_core::Error::*;
        match e {
            BadMagic | UnsupportedVersion(_) | UnsupportedDtype(_) | UnsupportedRank(_) | ReservedByte(_)
            | TruncatedHeader | TruncatedData | TrailingBytes(_) | NonFinite(_) | Parse(_) | Io(_) => Failure::Data(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "has",
    version = concat!(env!("CARGO_PKG_VERSION"), " (HAST format v1)"),
    about = "Hide-and-Seek augmentation, CAM localization and weakly-supervised evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-channel dataset mean of PNG or HAST images.
    Mean(MeanArgs),
    /// Hide random grid patches of one image.
    Hide(HideArgs),
    /// Resample a feature sequence and hide random segments.
    HideTemporal(HideTemporalArgs),
    /// Compute a CAM and localize it.
    Localize(LocalizeArgs),
    /// Score localization predictions against ground truth.
    Eval(EvalArgs),
    /// Monte-Carlo check that mean fill preserves expected activations.
    CheckActivations(CheckArgs),
    /// Train the toy model with and without hiding and compare localization.
    Demo(DemoArgs),
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn fraction(s: &str) -> Result<f32, String> {
    let v: f32 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1]"))
    }
}

fn open_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug)]
struct MeanArgs {
    /// Images to scan (PNG or rank-3 HAST).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Write the mean JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where the fill value comes from.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct FillSource {
    /// Mean JSON written by `has mean`.
    #[arg(long)]
    mean_file: Option<PathBuf>,
    /// Explicit per-channel fill, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    fill: Option<Vec<f32>>,
}

#[derive(Args, Debug)]
pub struct Seeding {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    epoch: u64,
    /// Index of this sample within the dataset.
    #[arg(long, default_value_t = 0)]
    sample_index: u64,
}

#[derive(Args, Debug)]
#[group(id = "patch", required = true, multiple = false)]
pub struct PatchChoiceArgs {
    #[arg(long, value_parser = positive)]
    patch_size: Option<usize>,
    /// Pick a size per image from a list such as "16,32,44,56,none".
    #[arg(long)]
    mixed: Option<String>,
}

#[derive(Args, Debug)]
struct HideArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output path; `.png` or `.hast`.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    patch: PatchChoiceArgs,
    #[arg(long, value_parser = probability)]
    p_hide: f64,
    #[command(flatten)]
    fill: FillSource,
    #[command(flatten)]
    seeding: Seeding,
    /// Allow patch sizes that do not divide the image.
    #[arg(long)]
    partial_edges: bool,
}

#[derive(Args, Debug)]
struct HideTemporalArgs {
    /// Rank-2 HAST sequence (T × C).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Steps after resampling.
    #[arg(long, value_parser = positive)]
    f_total: usize,
    /// Steps per segment.
    #[arg(long, value_parser = positive)]
    f_segment: usize,
    #[arg(long, value_parser = probability)]
    p_hide: f64,
    #[command(flatten)]
    fill: FillSource,
    #[command(flatten)]
    seeding: Seeding,
}

#[derive(Args, Debug)]
struct LocalizeArgs {
    /// Feature maps: rank-3 (H × W × M) or rank-2 (T × M) HAST.
    #[arg(long)]
    features: PathBuf,
    /// Classifier weights: rank-2 HAST, classes × maps.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    class: usize,
    #[arg(long, default_value_t = 0.2, value_parser = fraction)]
    tau: f32,
    #[arg(long, default_value_t = 8, value_parser = clap::builder::TypedValueParser::map(clap::builder::PossibleValuesParser::new(["4", "8"]), |s: String| s.parse::<u8>().unwrap()))]
    connectivity: u8,
    /// Also write the CAM as HAST.
    #[arg(long)]
    cam_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Ground truth, JSON lines.
    #[arg(long)]
    gt: PathBuf,
    /// Predictions, JSON lines.
    #[arg(long)]
    pred: PathBuf,
    /// Inputs are temporal intervals; report mAP.
    #[arg(long)]
    temporal: bool,
    /// IoU thresholds; defaults to 0.5 for images and 0.1..0.5 for temporal.
    #[arg(long, value_delimiter = ',', value_parser = open_fraction)]
    iou: Vec<f64>,
    /// Count IoU equal to the threshold as a hit.
    #[arg(long)]
    inclusive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FillChoice {
    Mean,
    Zero,
    Value(f32),
}

fn fill_choice(s: &str) -> Result<FillChoice, String> {
    match s {
        "mean" => Ok(FillChoice::Mean),
        "zero" => Ok(FillChoice::Zero),
        _ => match s.parse::<f32>() {
            Ok(v) if v.is_finite() => Ok(FillChoice::Value(v)),
            _ => Err(format!("expected mean, zero or a number, got {s:?}")),
        },
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Filter side.
    #[arg(long, default_value_t = 3, value_parser = positive)]
    k: usize,
    /// Patch size.
    #[arg(long, default_value_t = 8, value_parser = positive)]
    s: usize,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    p_hide: f64,
    #[arg(long, default_value = "mean", value_parser = fill_choice, allow_negative_numbers = true)]
    fill: FillChoice,
    /// Filter placements to evaluate.
    #[arg(long, default_value_t = 100_000, value_parser = positive)]
    samples: usize,
    /// Side of the random images; a multiple of `--s`. Defaults to 4 patches.
    #[arg(long, value_parser = positive)]
    image_side: Option<usize>,
    /// Random filter weights in [-1, 1] instead of all ones.
    #[arg(long)]
    random_weights: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Baseline,
    Has,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pool {
    Gap,
    Gmp,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    p_hide: f64,
    #[arg(long, default_value_t = 8, value_parser = positive)]
    patch_size: usize,
    #[arg(long, value_enum, default_value_t = Pool::Gap)]
    pool: Pool,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 30, value_parser = positive)]
    epochs: usize,
    #[arg(long, default_value_t = 2000, value_parser = positive)]
    n_train: usize,
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    n_test: usize,
    #[arg(long, default_value_t = 0.2, value_parser = fraction)]
    tau: f32,
    /// Write ground-truth-class CAMs of the first test images as PNGs here.
    #[arg(long)]
    dump_cams: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Mean(a) => commands::mean(&a.inputs, a.out.as_deref()),
        Command::Hide(a) => commands::hide(&a),
        Command::HideTemporal(a) => commands::hide_temporal(&a),
        Command::Localize(a) => commands::localize(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::CheckActivations(a) => commands::check_activations(&a),
        Command::Demo(a) => commands::demo(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
