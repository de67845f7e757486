//! `dejitter`: synthesize jitter-corrupted images, remove jitter, and score
//! reconstructions.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dejitter_core::JitterKind;

#[derive(Debug, Parser)]
#[command(
    name = "dejitter",
    version,
    about = "Bounded image dejittering by dynamic programming"
)]
struct Cli {
    /// Worker threads for column and line solves (default: all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt an image with seeded jitter and optional noise.
    Synthesize(SynthesizeArgs),
    /// Estimate the displacement of a corrupted image and reconstruct it.
    Dejitter(DejitterArgs),
    /// Compare a reconstruction with the original and, optionally, an
    /// estimated displacement with the truth. Prints JSON.
    Evaluate(EvaluateArgs),
    /// Write a synthetic test image.
    Pattern(PatternArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Line,
    LinePixel,
    Pixel,
}

impl From<Kind> for JitterKind {
    fn from(kind: Kind) -> Self {
        match kind {
            Kind::Line => JitterKind::Line,
            Kind::LinePixel => JitterKind::LinePixel,
            Kind::Pixel => JitterKind::Pixel,
        }
    }
}

#[derive(Debug, Args)]
struct SynthesizeArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Displacement variance in pixels squared.
    #[arg(long, default_value_t = 1.5)]
    sigma2: f64,
    /// Variance of additive Gaussian intensity noise; 0 disables noise.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Original 8-bit grayscale or RGB PNG.
    input: PathBuf,
    /// Receives corrupted.png, truth.txt and manifest.json.
    outdir: PathBuf,
}

#[derive(Debug, Args)]
struct DejitterArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Weight of the squared-displacement penalty.
    #[arg(long)]
    alpha: f64,
    /// Exponent of the finite-difference terms.
    #[arg(long)]
    p: f64,
    /// Highest vertical derivative order (1 or 2); line kinds only.
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Displacement bound in pixels, or `auto` to take the realized maximum
    /// from a manifest or truth file.
    #[arg(long, default_value = "auto")]
    rho: String,
    /// Manifest written by `synthesize` (for `--rho auto`). Defaults to
    /// manifest.json next to the input.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Ground-truth displacement file (for `--rho auto`).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Maximum number of four-sweep descent cycles (pixel kind).
    #[arg(long, default_value_t = 4)]
    rounds: usize,
    /// Where to write the descent trace CSV (pixel kind). Defaults to
    /// OUTDIR/trace.csv.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Corrupted 8-bit grayscale or RGB PNG.
    input: PathBuf,
    /// Receives reconstructed.png, estimate.txt and result.json.
    outdir: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    reconstructed: PathBuf,
    /// Ground-truth displacement file.
    #[arg(long, requires = "estimate")]
    truth: Option<PathBuf>,
    /// Estimated displacement file.
    #[arg(long, requires = "truth")]
    estimate: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PatternArgs {
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertical stripes instead of a shapes scene.
    #[arg(long)]
    stripes: bool,
    output: PathBuf,
}

/// An invalid flag combination detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        pool = pool.num_threads(threads);
    }
    let pool = pool.build()?;
    pool.install(|| match cli.command {
        Command::Synthesize(args) => commands::synthesize(&args),
        Command::Dejitter(args) => commands::dejitter(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Pattern(args) => commands::pattern(&args),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {message}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
