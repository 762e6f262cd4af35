//! Command-line grammar.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phonoprobe::analyses::{ContextMode, OffsetRange};
use phonoprobe::synth::EncodingMode;

#[derive(Debug, Parser)]
#[command(name = "phonoprobe", version, about = "Time-resolved phonetic decoding of speech representations")]
pub struct Cli {
    /// Worker threads for the parallel phases; 0 uses one per core. Never changes outputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a feature manifest and print token/frame counts.
    Validate(ValidateArgs),
    /// Compute logmel features and amplitude/pitch covariates from WAV files.
    Logmel(LogmelArgs),
    /// Regress amplitude and pitch out of a feature dataset.
    Preprocess(PreprocessArgs),
    /// Decoding accuracy as a function of offset from phone onset.
    Window(WindowArgs),
    /// Temporal generalization matrices and contours per word position.
    Tg(TgArgs),
    /// Cross-context generalization curves and effects.
    Context(ContextArgs),
    /// Correlate generalization effects between two context runs.
    Correlate(CorrelateArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Render SVG figures from a results directory.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ContextModeArg {
    Position,
    Manner,
}

impl From<ContextModeArg> for ContextMode {
    fn from(m: ContextModeArg) -> Self {
        match m {
            ContextModeArg::Position => ContextMode::WordPosition,
            ContextModeArg::Manner => ContextMode::MannerPair,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Static,
    Rotating,
    ContextInvariant,
    ContextEntangled,
}

impl From<EncodingArg> for EncodingMode {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Static => EncodingMode::Static,
            EncodingArg::Rotating => EncodingMode::Rotating,
            EncodingArg::ContextInvariant => EncodingMode::ContextInvariant,
            EncodingArg::ContextEntangled => EncodingMode::ContextEntangled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Window,
    Tg,
    Effects,
}

// ---------------------------------------------------------------------------
// Value parsers
// ---------------------------------------------------------------------------

/// Word positions given as `lo..hi` (inclusive) or a comma list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positions(pub Vec<u32>);

/// Upper bound on a word position; ranges are expanded eagerly.
pub const MAX_WORD_POSITION: u32 = 1000;

impl FromStr for Positions {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| -> Result<u32, String> {
            match v.trim().parse::<u32>() {
                Ok(p) if (1..=MAX_WORD_POSITION).contains(&p) => Ok(p),
                _ => Err(format!("bad word position {v:?}")),
            }
        };
        let list: Vec<u32> = match s.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if lo > hi {
                    return Err(format!("empty position range {s:?}"));
                }
                (lo..=hi).collect()
            }
            None => s.split(',').map(parse).collect::<Result<_, _>>()?,
        };
        let mut sorted = list.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != list.len() {
            return Err(format!("repeated word position in {s:?}"));
        }
        Ok(Positions(sorted))
    }
}

impl fmt::Display for Positions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Millisecond window `lo..hi`, inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsWindow(pub f64, pub f64);

impl FromStr for MsWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
        let parse = |v: &str| -> Result<f64, String> {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("bad millisecond value {v:?}"))
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(format!("empty window {s:?}"));
        }
        Ok(MsWindow(lo, hi))
    }
}

fn parse_offsets(s: &str) -> Result<OffsetRange, String> {
    s.parse::<OffsetRange>().map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Per-subcommand arguments
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random draw; recorded in all outputs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Feature manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,

    /// Regress amplitude and pitch out of the features first. Defaults to on
    /// for representation manifests that list covariates, off otherwise.
    #[arg(long, value_enum)]
    pub preprocess: Option<Toggle>,

    /// Ridge penalty.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Also write summary.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LogmelArgs {
    /// Audio manifest listing `wavs` and alignments.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Feature manifest with a `covariates` entry.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Frame offsets relative to onset, inclusive.
    #[arg(long, value_parser = parse_offsets, default_value = "-80..79", allow_hyphen_values = true)]
    pub offsets: OffsetRange,
    /// Decode vowels only.
    #[arg(long)]
    pub vowels_only: bool,
    /// Restrict to one word position.
    #[arg(long)]
    pub position: Option<u32>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TgArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_offsets, default_value = "-80..79", allow_hyphen_values = true)]
    pub offsets: OffsetRange,
    /// Word positions, `lo..hi` or a comma list.
    #[arg(long, default_value = "1..4")]
    pub positions: Positions,
    #[arg(long)]
    pub vowels_only: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_offsets, default_value = "-80..79", allow_hyphen_values = true)]
    pub offsets: OffsetRange,
    #[arg(long, value_enum, default_value = "position")]
    pub context_mode: ContextModeArg,
    /// Tokens drawn per context.
    #[arg(long, default_value_t = 4500)]
    pub subsample_n: usize,
    /// Fraction of each context's tokens used for training.
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,
    /// Contexts with fewer tokens are dropped (never below --subsample-n).
    #[arg(long)]
    pub min_class_size: Option<usize>,
    /// Effect window in milliseconds, inclusive.
    #[arg(long, default_value = "0..100", allow_hyphen_values = true)]
    pub effect_window: MsWindow,
    /// Keep consonants too (position mode only; manner pairs are always vowels).
    #[arg(long)]
    pub all_phones: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Results directory of the primary representation's `context` run.
    #[arg(long)]
    pub primary: PathBuf,
    /// Results directory of the acoustic baseline's `context` run.
    #[arg(long)]
    pub acoustic: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "0..100", allow_hyphen_values = true)]
    pub effect_window: MsWindow,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic spec (JSON); defaults apply to missing keys.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub encoding: Option<EncodingArg>,
    #[arg(long)]
    pub utterances: Option<usize>,
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the spec's seed when given.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Output directory; defaults to the results directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
