//! Command-line front end for `mixed-newton`.
//!
//! Every subcommand builds a [`report::Envelope`] around its payload. With
//! `--json <path|->` the envelope is written as pretty JSON, otherwise a short
//! text summary goes to the output stream. Exit codes: 0 for success or a
//! passing verdict, 1 for a failing verdict, 2 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
mod corpus;
mod input;
mod plot;
mod report;

pub use report::{Envelope, SCHEMA_VERSION, TOOL_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mixnewton", version, about = "Newton polyhedra and singularity probes for mixed polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Vertices, compact faces and essential non-compact faces of Γ₊.
    Faces(FacesArgs),
    /// Strong non-degeneracy: one verdict per compact face.
    Nondeg(NondegArgs),
    /// Radii of local tameness along the essential non-compact faces.
    Tame(TameArgs),
    /// Admissibility of a one-parameter family.
    Family(FamilyArgs),
    /// Whitney (b), Thom a_f and smoothness probes along arcs.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// SVG Newton diagram (n = 2) or a face table.
    Plot(PlotArgs),
    /// Runs the cases listed in a corpus manifest.
    Corpus(CorpusArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PolyInput {
    /// Polynomial text, or a path to a `.mp` file.
    #[arg(long)]
    pub poly: String,
    /// Ambient dimension; inferred from the largest variable index if absent.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyInput {
    /// Path to a `.fam` file.
    #[arg(long, conflicts_with = "poly")]
    pub file: Option<PathBuf>,
    /// Family text in `t`, `z_i`, `~z_i`.
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct JsonOutput {
    /// Write the JSON report to a path, or `-` for stdout.
    #[arg(long, value_name = "PATH|-")]
    pub json: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multistart count per face.
    #[arg(long, default_value_t = 512)]
    pub starts: usize,
    /// Residual accepted as a critical point.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_accept: f64,
    /// Residual above which a face counts as clean.
    #[arg(long, default_value_t = 1e-3)]
    pub tol_floor: f64,
}

#[derive(Args, Debug)]
pub struct FacesArgs {
    #[command(flatten)]
    pub input: PolyInput,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Args, Debug)]
pub struct NondegArgs {
    #[command(flatten)]
    pub input: PolyInput,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Args, Debug)]
pub struct TameArgs {
    #[command(flatten)]
    pub input: PolyInput,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Comma-separated increasing probe radii.
    #[arg(long, value_delimiter = ',')]
    pub radius_grid: Option<Vec<f64>>,
    /// Fail (exit 1) when r_nc is below this value.
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub input: FamilyInput,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.9)]
    pub t_max: f64,
    /// Circles |t| = t_max·2^-k sampled.
    #[arg(long, default_value_t = 4)]
    pub rings: usize,
    #[arg(long, default_value_t = 8)]
    pub angles: usize,
    #[arg(long, value_delimiter = ',')]
    pub radius_grid: Option<Vec<f64>>,
    /// Points of the smoothness spot-check; 0 skips it.
    #[arg(long, default_value_t = 200)]
    pub smoothness_samples: usize,
    /// Pull back along z_i ↦ z_i^ν_i z̄_i^μ_i first.
    #[arg(long, value_delimiter = ',', requires_all = ["cover_mu", "cover_delta"])]
    pub cover_nu: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', requires = "cover_nu")]
    pub cover_mu: Option<Vec<u32>>,
    #[arg(long, requires = "cover_nu")]
    pub cover_delta: Option<u32>,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Subcommand, Debug)]
pub enum ProbeCommand {
    /// Whitney (b) for the pair of arcs in an `.arc.json` pair file.
    Whitney(WhitneyArgs),
    /// Thom a_f along an arc against a stratum.
    Thom(ThomArgs),
    /// Smoothness or nearby-fibre spot-checks.
    Spot(SpotArgs),
}

#[derive(Args, Debug)]
pub struct WhitneyArgs {
    #[command(flatten)]
    pub input: FamilyInput,
    /// File with `p_arc` and `q_arc`.
    #[arg(long)]
    pub pair: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub truncation: Option<i32>,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Args, Debug)]
pub struct ThomArgs {
    #[command(flatten)]
    pub input: FamilyInput,
    #[arg(long)]
    pub arc: PathBuf,
    /// Stratum name such as `C_{}` or `A_{1,2}`.
    #[arg(long, default_value = "C_{}")]
    pub stratum: String,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub truncation: Option<i32>,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpotModeArg {
    Smoothness,
    NearbyFibres,
}

#[derive(Args, Debug)]
pub struct SpotArgs {
    #[command(flatten)]
    pub input: FamilyInput,
    #[arg(long, value_enum, default_value_t = SpotModeArg::Smoothness)]
    pub mode: SpotModeArg,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated parameter values such as `0,0.5,0.9i`.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub t_values: Vec<String>,
    /// Fibre level modulus for nearby fibres.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub critical_threshold: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub transversality_threshold: f64,
    #[command(flatten)]
    pub out: JsonOutput,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: PolyInput,
    /// SVG destination, or `-` for stdout.
    #[arg(long, value_name = "PATH|-", default_value = "-")]
    pub svg: String,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Directory holding `manifest.json`.
    #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))]
    pub dir: PathBuf,
    /// Include cases marked slow.
    #[arg(long)]
    pub all: bool,
    /// Run only cases whose name contains this text.
    #[arg(long)]
    pub filter: Option<String>,
    #[command(flatten)]
    pub out: JsonOutput,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Reports and summaries go to `out`, errors to stderr.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                eprint!("{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            EXIT_USAGE
        }
    }
}
