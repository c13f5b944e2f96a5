//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::ilacs::{enhance_acs_tiles, enhance_ilacs_tiles};
use crate::io::{load_image, load_mask, save_image};
use crate::lgot::{enhance, BlendConfig, DEFAULT_SIGMA_DIVISOR};
use crate::matching::{eval_protocol, ChainConfig, MatcherKind, RansacConfig, ScoreMode};
use crate::preprocess::{downscale, downscale_mask, gaussian_blur, histogram};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ilacs", version, about = "Tile-based local contrast enhancement and descriptor-match evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance a grayscale image.
    Enhance(EnhanceArgs),
    /// Write a 256-bin histogram as `bin,count` CSV.
    Hist(HistArgs),
    /// Score a pairs file and report the equal error rate.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Mode {
    /// Four-layer Gaussian-blended intensity-limited stretch.
    #[default]
    IlacsLgot,
    /// Non-blended intensity-limited stretch per tile.
    IlacsTiles,
    /// Non-blended full-range stretch per tile.
    AcsTiles,
}

/// Parameters of one `enhance` invocation.
#[derive(Debug, Clone, Args)]
pub struct EnhanceArgs {
    /// Input PGM or PNG.
    pub input: PathBuf,
    /// Output path (.pgm or .png).
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::IlacsLgot)]
    pub mode: Mode,
    #[arg(long, default_value_t = 16)]
    pub tile_size: usize,
    /// Gaussian sigma is tile_size / sigma_divisor.
    #[arg(long, default_value_t = DEFAULT_SIGMA_DIVISOR)]
    pub sigma_divisor: f64,
    /// Foreground matte; non-zero pixels are foreground.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Downscale factor in (0, 1], applied to image and mask before enhancement.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Gaussian blur sigma applied to the enhanced image ahead of feature detection.
    #[arg(long)]
    pub pre_blur: Option<f64>,
}

#[derive(Debug, Args)]
struct HistArgs {
    input: PathBuf,
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatcherArg {
    Ed,
    KnnRt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreArg {
    Raw,
    Normalized,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Pairs file: `genuine|impostor,probe,template1;template2;...` per line.
    pairs: PathBuf,
    #[arg(long, value_enum, default_value_t = MatcherArg::KnnRt)]
    matcher: MatcherArg,
    /// Ratio-test threshold (default 0.7, or 0.8 with --bidirectional).
    #[arg(long)]
    ratio: Option<f64>,
    /// Distance cut-off for ED matching.
    #[arg(long)]
    max_dist: Option<f64>,
    #[arg(long)]
    bidirectional: bool,
    #[arg(long)]
    ransac: bool,
    #[arg(long, default_value_t = 1000)]
    ransac_iters: usize,
    #[arg(long, default_value_t = 5.0)]
    ransac_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    root_sift: bool,
    #[arg(long, value_enum, default_value_t = ScoreArg::Raw)]
    score: ScoreArg,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the `enhance` pipeline: load, downscale, enhance, blur, save.
pub fn run_enhance(args: &EnhanceArgs) -> Result<()> {
    if !(args.scale > 0.0 && args.scale <= 1.0) {
        return Err(Error::param("scale", format!("{} is outside (0, 1]", args.scale)));
    }
    let mut image = load_image(&args.input)?;
    let mut mask = args.mask.as_ref().map(load_mask).transpose()?;
    if let Some(m) = &mask {
        if m.dimensions() != image.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: image.dimensions(),
                found: m.dimensions(),
            });
        }
    }
    if args.scale < 1.0 {
        image = downscale(&image, args.scale)?;
        mask = mask.map(|m| downscale_mask(&m, args.scale)).transpose()?;
    }
    let mut out = match args.mode {
        Mode::IlacsLgot => enhance(&image, mask.as_ref(), &BlendConfig::new(args.tile_size, args.sigma_divisor)?)?,
        Mode::IlacsTiles => enhance_ilacs_tiles(&image, mask.as_ref(), args.tile_size)?,
        Mode::AcsTiles => enhance_acs_tiles(&image, mask.as_ref(), args.tile_size)?,
    };
    if let Some(sigma) = args.pre_blur {
        out = gaussian_blur(&out, sigma)?;
    }
    save_image(&out, &args.output)
}

fn run_hist(args: &HistArgs) -> Result<()> {
    let image = load_image(&args.input)?;
    let mask = args.mask.as_ref().map(load_mask).transpose()?;
    let hist = histogram(&image, mask.as_ref())?;
    match &args.output {
        Some(path) => hist.write_csv(path),
        None => write_stdout(&hist.to_csv()),
    }
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let cfg = ChainConfig {
        matcher: match args.matcher {
            MatcherArg::Ed => MatcherKind::Ed,
            MatcherArg::KnnRt => MatcherKind::KnnRt,
        },
        ratio: args.ratio,
        max_dist: args.max_dist,
        bidirectional: args.bidirectional,
        ransac: args.ransac.then_some(RansacConfig {
            iters: args.ransac_iters,
            tol: args.ransac_tol,
            seed: args.seed,
        }),
        root_sift: args.root_sift,
        score: match args.score {
            ScoreArg::Raw => ScoreMode::Raw,
            ScoreArg::Normalized => ScoreMode::Normalized,
        },
    };
    let outcome = eval_protocol(&args.pairs, &cfg)?;
    match &args.out {
        Some(path) => {
            outcome.result.write_csv(path)?;
            write_stdout(&format!("eer,{}\n", outcome.result.eer))
        }
        None => write_stdout(&outcome.result.to_csv()),
    }
}

fn write_stdout(s: &str) -> Result<()> {
    std::io::stdout()
        .write_all(s.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Enhance(args) => run_enhance(args),
        Command::Hist(args) => run_hist(args),
        Command::Eval(args) => run_eval(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}
