use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvestat_core::census::CurveKind;
use curvestat_core::rmt::SamplerMethod;

#[derive(Debug, Parser)]
#[command(name = "curvestat", version, about = "Point-count statistics of curves over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poisson(lambda(q)) predictions: lambda, raw and falling moments, PMF on the Weil window.
    Predict(PredictArgs),
    /// Graded dimensions of the tautological ring R_n and the Hilbert-series ratio at q.
    Series(SeriesArgs),
    /// Stable / unstable trace bookkeeping over a genus range.
    Trace(TraceArgs),
    /// Constrained random-matrix experiment on USp(2g).
    Rmt(RmtArgs),
    /// Exhaustive weighted census of genus-1 or genus-2 curves.
    Census(CensusArgs),
    /// Side-by-side falling moments of two reports against lambda^n.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit the execution block (worker count, wall-clock time) from JSON.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub q: u64,
    /// Highest moment order.
    #[arg(long, default_value_t = 6)]
    pub n: u32,
    /// Genus used for the Weil window of the PMF table.
    #[arg(long, default_value_t = 1)]
    pub g: u32,
    /// Decimal digits of the certified renderings.
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Number of psi classes.
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// Largest j of dim R_n^{2j}.
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// First genus of the sweep.
    #[arg(long, default_value_t = 2)]
    pub g: u32,
    /// Last genus of the sweep.
    #[arg(long)]
    pub gmax: u32,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    /// Truncation depth of the Hilbert-series target.
    #[arg(long, default_value_t = 200)]
    pub depth: usize,
    /// Also sweep the q = g^K inequality up to genus `--kprime-gmax`.
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub kprime_gmax: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Matrix,
    Density,
}

impl From<MethodArg> for SamplerMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Matrix => SamplerMethod::Matrix,
            MethodArg::Density => SamplerMethod::Density,
        }
    }
}

#[derive(Debug, Args)]
pub struct RmtArgs {
    #[arg(long)]
    pub g: u32,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub samples: u64,
    /// Required: there is no clock-derived default.
    #[arg(long)]
    pub seed: u64,
    /// Discreteness window |N_k - round(N_k)| <= epsilon.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Largest k read by the constraints.
    #[arg(long, default_value_t = 6)]
    pub max_index: u32,
    /// Apply discreteness only at these k (repeatable); default is every k <= max-index.
    #[arg(long = "discreteness-index")]
    pub discreteness_index: Vec<u32>,
    /// Disable every constraint.
    #[arg(long, conflicts_with = "positivity")]
    pub no_constraints: bool,
    /// Positivity (N_1 >= 0) only.
    #[arg(long)]
    pub positivity: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Matrix)]
    pub method: MethodArg,
    /// Highest moment order.
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: CurveKind,
    /// Field order (alternative to --field).
    #[arg(long, conflicts_with = "field", required_unless_present = "field")]
    pub q: Option<u64>,
    /// Field as p^k, e.g. 2^3.
    #[arg(long)]
    pub field: Option<String>,
    /// Highest moment order.
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// Also decompose the smooth locus into explicit orbits (small q only).
    #[arg(long)]
    pub validate_orbits: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_kind(s: &str) -> Result<CurveKind, String> {
    s.parse().map_err(|_| format!("unsupported kind `{s}` (expected genus1 or genus2)"))
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON output of `curvestat census` (or any report with falling moments).
    #[arg(long)]
    pub census: PathBuf,
    /// JSON output of `curvestat rmt` (or any report with falling moments).
    #[arg(long)]
    pub rmt: PathBuf,
    /// Field order; must match the inputs when given.
    #[arg(long)]
    pub q: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
