//! `symwit`: build symmetric measurements, maps and witnesses; evaluate,
//! certify and search from the command line. Reports are JSON on stdout.
//!
//! Exit codes: 0 success, 1 input error, 2 negative verdict.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Serialize, Debug)]
#[command(name = "symwit", version, about = "Entanglement witnesses from symmetric measurements")]
pub struct Cli {
    /// Override the PSD, PPT and detection thresholds (positive).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Symmetric measurements.
    #[command(subcommand)]
    Povm(PovmCommand),
    /// Positive trace-preserving maps.
    #[command(subcommand)]
    Map(MapCommand),
    /// Entanglement witnesses.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Evaluate Tr(Wρ).
    Detect(StateArgs),
    /// Check a state is valid and PPT and that the witness detects it.
    Certify(StateArgs),
    /// Search for a PPT state the witness detects.
    HuntPpt(HuntArgs),
    /// Worked examples.
    #[command(subcommand)]
    Example(ExampleCommand),
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct BasisArgs {
    /// `gellmann:<d>` or `mub3`.
    #[arg(long)]
    pub basis: String,
    /// `ex3`, `ex4`, `ex5` or `seq:<M>`.
    #[arg(long = "group", default_value = "seq:2")]
    pub group: String,
    /// Keep only these groups (1-based, comma separated).
    #[arg(long, value_delimiter = ',')]
    pub select: Option<Vec<usize>>,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum PovmCommand {
    /// Build all elements for a purity `x` (a number or `opt`).
    Build {
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long)]
        x: String,
    },
    /// Check the symmetry conditions of a POVM bundle.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Largest admissible purity for a basis.
    Optx {
        #[command(flatten)]
        basis: BasisArgs,
    },
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum MapCommand {
    /// Build the map described in a JSON spec file.
    Build {
        #[arg(long)]
        spec: PathBuf,
        /// Random rank-1 inputs for the positivity probe (0 skips it).
        #[arg(long, default_value_t = 0)]
        probe: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Choi,
    Rescaled,
    Ccnr,
    M2,
    Weighted,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessCommand {
    Build(WitnessArgs),
}

#[derive(Args, Serialize, Debug)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    pub form: Form,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Number of subtracted groups.
    #[arg(long)]
    pub l: Option<usize>,
    /// Rotation preset for every group (`identity:<M>`, `cycle:<M>`, `cycle-inv:<M>`).
    #[arg(long)]
    pub rotation: Option<String>,
    /// JSON file with one rotation per group (presets or matrices).
    #[arg(long)]
    pub rotations: Option<PathBuf>,
    /// Per-group weights for the weighted form.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// Per-element signs for the M=2 form, `G₀` first (e.g. `-,-,+`).
    #[arg(long, allow_hyphen_values = true)]
    pub signs: Option<String>,
    /// CCNR matrix: `identity`, `zero`, `recipe` or a JSON file of rows.
    #[arg(long)]
    pub q: Option<String>,
    /// Purity for the Choi form (a number or `opt`).
    #[arg(long)]
    pub x: Option<String>,
}

#[derive(Args, Serialize, Debug)]
pub struct StateArgs {
    /// Witness bundle or bare matrix JSON.
    #[arg(long)]
    pub witness: PathBuf,
    /// State matrix JSON.
    #[arg(long)]
    pub state: PathBuf,
    /// Divide the state by its trace first.
    #[arg(long)]
    pub renormalize: bool,
    /// Local dimensions `dA,dB` (default: square root of the size, twice).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

#[derive(Args, Serialize, Debug)]
pub struct HuntArgs {
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleCommand {
    List,
    Reproduce {
        id: String,
        /// Write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
