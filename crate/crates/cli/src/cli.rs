use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gcb", version, about = "Graph covers, Bethe free energy and graph-cover decoding")]
pub struct Cli {
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Cap on the raw configuration space (overrides GCB_CONFIG_CAP).
    #[arg(long, global = true)]
    pub config_cap: Option<u64>,

    /// Cap on the number of enumerated covers (overrides GCB_COVER_CAP).
    #[arg(long, global = true)]
    pub cover_cap: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Precision::Exact)]
    pub precision: Precision,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Exact,
    Float,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the valid configurations and their global values.
    Enumerate(NfgArg),
    /// Gibbs partition function.
    Zgibbs(ZgibbsArgs),
    /// Degree-M Bethe partition function from the covers of the graph.
    ZbetheM(ZbetheMArgs),
    /// Minimize the Bethe free energy over the local marginal polytope.
    ZbetheMin(ZbetheMinArgs),
    /// Number of M-cover configurations mapping to a pseudo-marginal vector.
    PreimageCount(PreimageArgs),
    /// Count, sample or enumerate M-covers.
    Covers(CoversArgs),
    /// Run sum-product message passing.
    Spa(SpaArgs),
    /// Maximum-Bethe-entropy completion of half-edge marginals.
    Bme(BmeArgs),
    /// Decode a received vector.
    Decode(DecodeArgs),
    /// Induced Bethe entropy curve of a regular LDPC code.
    LdpcCurve(LdpcArgs),
    /// Replay the worked case studies and compare them with the stored goldens.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct NfgArg {
    #[arg(long)]
    pub nfg: PathBuf,
}

#[derive(Debug, Args)]
pub struct ZgibbsArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(short = 'T', long = "temperature", default_value_t = 1.0)]
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZbetheMethod {
    Enumeration,
    Typesum,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct ZbetheMArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(short = 'M', long = "degree")]
    pub m: u32,
    #[arg(short = 'T', long = "temperature", default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, value_enum, default_value_t = ZbetheMethod::Enumeration)]
    pub method: ZbetheMethod,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Required with `--method monte-carlo`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ZbetheMinArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(short = 'T', long = "temperature", default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Write the minimizing pseudo-marginals here.
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PreimageMethod {
    Closed,
    Brute,
}

#[derive(Debug, Args)]
pub struct PreimageArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(long)]
    pub beta: PathBuf,
    #[arg(short = 'M', long = "degree")]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = PreimageMethod::Closed)]
    pub method: PreimageMethod,
}

#[derive(Debug, Args)]
pub struct CoversArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(short = 'M', long = "degree")]
    pub m: u32,
    /// Print one uniformly random cover specification for this seed.
    #[arg(long, conflicts_with = "enumerate")]
    pub random: Option<u64>,
    /// Enumerate every cover and report the multiset of partition functions.
    #[arg(long)]
    pub enumerate: bool,
}

#[derive(Debug, Args)]
pub struct SpaArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    #[arg(short = 'T', long = "temperature", default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0.0)]
    pub damping: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Write `iteration,residual,f_bethe` per sweep as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BmeArgs {
    #[arg(long)]
    pub nfg: PathBuf,
    /// Comma-separated marginals `P(x_e = 1)`, one per half-edge.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub omega: Vec<f64>,
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Decoder {
    Bmapd,
    Smapd,
    Bgcd,
    Sgcd,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Parity-check matrix (dense 0/1 rows or alist).
    #[arg(long, conflicts_with = "nfg", required_unless_present = "nfg")]
    pub pcm: Option<PathBuf>,
    /// Code graph; its half-edges carry the code symbols unless `--symbols` is given.
    #[arg(long)]
    pub nfg: Option<PathBuf>,
    /// Edges carrying the code symbols, for codes whose symbols sit on full edges.
    #[arg(long, value_delimiter = ',', requires = "nfg")]
    pub symbols: Option<Vec<String>>,
    /// Channel file with `W <y> <x> <prob>` lines.
    #[arg(long)]
    pub channel: PathBuf,
    /// Received symbols, separated by whitespace or commas.
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub decoder: Decoder,
    /// Use the literal degree-M cover decoder (bgcd and sgcd only).
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LdpcArgs {
    #[arg(long)]
    pub dl: u32,
    #[arg(long)]
    pub dr: u32,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub smin: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub smax: f64,
    #[arg(long, default_value_t = 601)]
    pub steps: usize,
    /// CSV destination; the shape report goes to stdout. Without it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// Run a single case; all cases run by default.
    #[arg(long)]
    pub case: Option<String>,
    /// Write the current outputs as goldens into this directory instead of comparing.
    #[arg(long)]
    pub bless: Option<PathBuf>,
}
