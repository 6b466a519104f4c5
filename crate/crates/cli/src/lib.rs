//! Command-line surface: `solve`, `verify`, `generate` and `transform`.
//!
//! Exit codes: 0 when the specification holds (or the command succeeded),
//! 2 when a best-effort policy misses the threshold, 1 on any error.

mod commands;
mod manifest;
mod mapping;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;
pub use manifest::{FileRecord, RunManifest};
pub use mapping::{product_mapping, simple_mapping};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSATISFIED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: robfsc::Error,
    },

    #[error(transparent)]
    Core(#[from] robfsc::Error),

    #[error("{0}")]
    Invalid(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "robfsc",
    version,
    about = "Robust finite-memory policies for interval POMDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a policy meeting the threshold under every instantiation.
    Solve(SolveArgs),
    /// Robust value of a stored policy.
    Verify(VerifyArgs),
    /// Write a benchmark model.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Write a transformed model and its state mapping.
    #[command(subcommand)]
    Transform(TransformCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Sparse,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1)]
    pub memory: usize,
    #[arg(long, default_value_t = 1e4)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub omega: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// 0 starts from the uniform policy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Additional runs from perturbed uniform policies (seeds seed+1..).
    #[arg(long, default_value_t = 0)]
    pub restarts: u64,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Defaults to `<policy or trace>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Solve on the interval-midpoint instantiation instead.
    #[arg(long)]
    pub nominal: bool,
    #[arg(long, value_enum, default_value_t = Backend::Sparse)]
    pub backend: Backend,
    /// Record wall-clock seconds in the trace (breaks byte-identical reruns).
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub model: PathBuf,
    pub policy: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = Direction::Maximize)]
    pub direction: Direction,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Evaluate on the interval-midpoint instantiation instead.
    #[arg(long)]
    pub nominal: bool,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCmd {
    Spacecraft(SpacecraftArgs),
    Aircraft(AircraftArgs),
}

#[derive(Debug, Args)]
pub struct SpacecraftArgs {
    #[arg(long, default_value_t = 6)]
    pub nmts: usize,
    #[arg(long, default_value_t = 20)]
    pub res: usize,
    /// Largest ring offset of a switch; 0 disables switching.
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    #[arg(long = "switch", num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.5, 0.95])]
    pub switch_success: Vec<f64>,
    #[arg(long = "detect", num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.5, 0.95])]
    pub detect_success: Vec<f64>,
    /// Object cell `<orbit>:<time>`; repeatable.
    #[arg(long = "object", value_parser = parse_cell)]
    pub objects: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    pub random_objects: usize,
    /// Observation cells per orbit; defaults to min(res, 40).
    #[arg(long)]
    pub obs_cells: Option<usize>,
    /// Observe only the time cell, not the orbit.
    #[arg(long)]
    pub hide_orbit: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AircraftArgs {
    #[arg(long, default_value_t = 5)]
    pub pos: usize,
    #[arg(long, default_value_t = 3)]
    pub speed: usize,
    #[arg(long = "accel", num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.2, 0.8])]
    pub intruder_accel: Vec<f64>,
    #[arg(long = "pilot", num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.7, 0.9])]
    pub pilot_responsive: Vec<f64>,
    /// Position cells per observation and axis.
    #[arg(long, default_value_t = 1)]
    pub quant: usize,
    #[arg(long, default_value_t = 0)]
    pub unsafe_radius: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TransformCmd {
    /// Binary action-state trees with interval leaves.
    Simple { input: PathBuf, output: PathBuf },
    /// Memory product with `k` memory cells.
    Product {
        #[arg(long)]
        memory: usize,
        input: PathBuf,
        output: PathBuf,
    },
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (n, i) = s
        .split_once(':')
        .ok_or_else(|| format!("expected <orbit>:<time>, found `{s}`"))?;
    Ok((
        n.parse().map_err(|_| format!("bad orbit `{n}`"))?,
        i.parse().map_err(|_| format!("bad time index `{i}`"))?,
    ))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Messages go to stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
