use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used by randomized commands when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5157_4E52;

#[derive(Parser, Debug)]
#[command(name = "signrange", version, about = "Experiments on the range of signed complex series")]
pub struct Cli {
    /// Worker threads for parallel enumeration.
    #[arg(long, global = true, env = "SIGNRANGE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sequence generation.
    #[command(subcommand)]
    Seq(SeqCommand),
    /// Bounded-prefix and target-hitting sign selection.
    #[command(subcommand)]
    Signs(SignsCommand),
    /// Ratio classes and direction profiles.
    #[command(subcommand)]
    Ratio(RatioCommand),
    /// Two-ratio function systems.
    #[command(subcommand)]
    Moran(MoranCommand),
    /// Exhaustive small-N ground truth.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Rasterized exact ranges.
    #[command(subcommand)]
    Range(RangeCommand),
    /// Density of an index set.
    Density(DensityArgs),
    /// Deletion-map Hölder check.
    Holder(HolderArgs),
    /// Box-counting estimate over a sign-prefix tree.
    Boxdim(BoxdimArgs),
    /// Exact membership of a rational in the dyadic set A.
    Member(MemberArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqCommand {
    Gen(SeqGenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    /// `(-1)^n/(n ln(n+1)) + i/n`
    Example41,
    /// Dyadic tower blocks from `--m` and `--tower-n`.
    Example42,
    /// `w(n)·(t + i)` for `--ratio t`.
    Linear,
    /// Round-robin of linear families, one per `--ratios` entry.
    Interleave,
}

#[derive(Args, Debug, Serialize)]
pub struct SeqGenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Number of terms (defaults to the full tower for example42).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub ratio: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub ratios: Vec<String>,
    /// harmonic, power:P or geometric:Q
    #[arg(long, default_value = "harmonic")]
    pub scale: String,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u32>,
    #[arg(long = "tower-n", value_delimiter = ',')]
    pub tower_n: Vec<u32>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InputArgs {
    /// Sequence file: a `seq gen` artifact or a family record.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Use only the first N terms.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignsCommand {
    Bound(SignsBoundArgs),
    Target(SignsTargetArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SignsBoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Blockwise tail control instead of a single bounded pass.
    #[arg(long)]
    pub tail: bool,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SignsTargetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Complex literal `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    pub target: String,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioCommand {
    Report(RatioReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct RatioReportArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Keep extracting classes while this much mass remains.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Directions for the non-summability profile (0 skips it).
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoranCommand {
    /// Build the system and write it as JSON.
    Build(MoranBuildArgs),
    /// Check brackets and covering level by level.
    Check(MoranBuildArgs),
    /// Enumerate attractor points to CSV or a graymap.
    Render(MoranRenderArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MoranSource {
    /// Window with ratio a/b near 2 (synthetic windows when omitted).
    #[arg(long, requires = "second")]
    pub first: Option<PathBuf>,
    /// Window with ratio β/α near 3.
    #[arg(long, requires = "first")]
    pub second: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    /// Ratio of the first synthetic window.
    #[arg(long = "ratioA", default_value_t = 2.0, allow_hyphen_values = true)]
    pub ratio_a: f64,
    /// Ratio of the second synthetic window.
    #[arg(long = "ratioB", default_value_t = 3.0, allow_hyphen_values = true)]
    pub ratio_b: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct MoranBuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MoranSource,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RenderFormat {
    Csv,
    Pgm,
}

#[derive(Args, Debug, Serialize)]
pub struct MoranRenderArgs {
    /// A system written by `moran build`; otherwise built from the flags.
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MoranSource,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: RenderFormat,
    /// Raster side in pixels.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Raster window `x0,y0,x1,y1` (default: the square of radius R).
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// All signed sums, as CSV.
    Range(OracleArgs),
    /// Minimal prefix discrepancy with a witness.
    Disc(OracleArgs),
    /// Range equivariance under a linear map.
    Equiv(OracleEquivArgs),
    /// ε-net coverage of a rectangle by the range.
    Cover(OracleCoverArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleEquivArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Row-major entries `m00,m01,m10,m11`.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleCoverArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// `x0,y0,x1,y1`
    #[arg(long, allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long)]
    pub eps: f64,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeCommand {
    Raster(RangeRasterArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct RangeRasterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Raster window `x0,y0,x1,y1` (default: the bounding box).
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    /// Also write the point list as CSV here.
    #[serde(skip)]
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    /// `arith:Q:J`, `explicit:1,4,9`, `squares:N` or `empty`.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub horizon: u64,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HolderArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub length: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    /// Partial sums that can still end in the ball (needs `--in`).
    Ball,
    /// Every prefix.
    All,
    /// First sign fixed to +1.
    FirstPlus,
    /// Every even-indexed sign fixed to +1.
    EvenPlus,
}

#[derive(Args, Debug, Serialize)]
pub struct BoxdimArgs {
    #[arg(long, value_enum, default_value = "ball")]
    pub predicate: Predicate,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: String,
    #[arg(long, default_value_t = 0.1)]
    pub radius: f64,
    #[arg(long, default_value_t = 16)]
    pub depth: usize,
    /// Also write the survival counts `k,L_k` as CSV here.
    #[serde(skip)]
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MemberArgs {
    /// Rational `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    pub value: String,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}
