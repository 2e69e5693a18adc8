//! The `tenkit` command-line driver.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use tenkit::{CooTensor, Exec, Format, TensorError};

pub mod commands;
pub mod report;

pub use report::BenchRecord;

#[derive(Debug, Parser)]
#[command(name = "tenkit", version, about = "Sparse tensor formats, MTTKRP and CP-ALS")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text/CSV.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Statistics, storage per format and slice census for every mode order.
    Inspect(InspectArgs),
    /// Rewrite a tensor canonically: duplicates summed, zeros dropped, sorted.
    Convert(ConvertArgs),
    /// Time one MTTKRP and report a benchmark record.
    Mttkrp(MttkrpArgs),
    /// CP decomposition by alternating least squares.
    Cpd(CpdArgs),
    /// Sweep fiber-split thresholds through the block scheduling model.
    Simulate(SimulateArgs),
    /// Write a synthetic power-law tensor.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
    /// Only this mode order (comma-separated, e.g. `2,0,1`) instead of one per mode.
    #[arg(long, value_delimiter = ',')]
    pub mode_order: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Sort nonzeros under this mode order (default `0,1,..`).
    #[arg(long, value_delimiter = ',')]
    pub mode_order: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Worker threads for the parallel kernels.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run kernels single-threaded.
    #[arg(long)]
    pub sequential: bool,
    /// Random seed for factor initialization.
    #[arg(long, env = "TENKIT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MttkrpArgs {
    pub path: PathBuf,
    #[arg(long, default_value = "hbcsf")]
    pub format: FormatArg,
    #[arg(long, default_value_t = 0)]
    pub mode: usize,
    #[arg(long, default_value_t = 32)]
    pub rank: usize,
    /// Maximum nonzeros per fiber segment for bcsf/hbcsf.
    #[arg(long, default_value_t = 128)]
    pub fiber_threshold: usize,
    /// Nonzero capacity of one thread block when binning slices.
    #[arg(long, default_value_t = 512)]
    pub block_size: usize,
    /// Timed repetitions after one warm-up run; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Compare against the COO kernel and fail if rows deviate by more than 1e-8.
    #[arg(long)]
    pub check: bool,
    /// Also time this format and report iterations needed to amortize preprocessing.
    #[arg(long)]
    pub baseline: Option<FormatArg>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct CpdArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub rank: usize,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    /// Stop when the fit changes by less than this.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value = "hbcsf")]
    pub format: FormatArg,
    #[arg(long, default_value_t = 128)]
    pub fiber_threshold: usize,
    /// Write the fit history CSV here instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub path: PathBuf,
    /// Fiber thresholds to sweep; `inf` means no splitting.
    #[arg(long, default_value = "inf,1024,128,32")]
    pub thresholds: String,
    #[arg(long, default_value_t = 56)]
    pub sms: usize,
    /// Threads per block.
    #[arg(long, default_value_t = 512)]
    pub block_size: usize,
    #[arg(long, default_value_t = 32)]
    pub warp_size: usize,
    #[arg(long, default_value_t = 1)]
    pub blocks_per_sm: usize,
    /// Slice mode of the simulated tree.
    #[arg(long, default_value_t = 0)]
    pub mode: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Dimensions, e.g. `100x200x300`.
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub nnz: usize,
    #[arg(long, default_value_t = 1.0)]
    pub skew: f64,
    #[arg(long, env = "TENKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// A storage format accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatArg(pub Format);

impl std::str::FromStr for FormatArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<Format>().map(FormatArg).map_err(|e| e.to_string())
    }
}

/// Why a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Data(e) => write!(f, "{e:#}"),
            Failure::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<TensorError> for Failure {
    fn from(e: TensorError) -> Self {
        if e.is_argument_error() {
            Failure::Usage(e.into())
        } else {
            Failure::Data(e.into())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Read a FROSTT file, naming the file in any error.
pub fn load_tensor(path: &Path) -> Result<CooTensor, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(anyhow!("{}: {e}", path.display())))?;
    tenkit::parse_frostt(BufReader::new(file)).map_err(|e| Failure::Data(anyhow!("{}: {e}", path.display())))
}

/// File stem used as the tensor id in reports.
pub fn tensor_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

impl ExecArgs {
    /// Applies `--threads` and returns the execution mode.
    pub fn setup(&self) -> Result<Exec, Failure> {
        if let Some(n) = self.threads {
            tenkit::set_num_threads(n)?;
        }
        Ok(if self.sequential { Exec::Sequential } else { Exec::Parallel })
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let json = cli.json;
    match cli.command {
        Command::Inspect(a) => commands::inspect::run(&a, json),
        Command::Convert(a) => commands::convert::run(&a, json),
        Command::Mttkrp(a) => commands::mttkrp::run(&a, json),
        Command::Cpd(a) => commands::cpd::run(&a, json),
        Command::Simulate(a) => commands::simulate::run(&a, json),
        Command::Gen(a) => commands::gen::run(&a, json),
    }
}
