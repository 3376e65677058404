//! `qdiscrim`: batch front-end for the discrimination toolkit.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdiscrim::{GeneratorKind, PriorSpec, Tolerances};

use crate::error::{exit, CliError};

#[derive(Parser, Debug)]
#[command(
    name = "qdiscrim",
    version,
    about = "Bounds and measurements for minimum-error discrimination of quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Base seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// PSD tolerance, relative to the largest eigenvalue magnitude.
    #[arg(long = "tol-psd", global = true, value_parser = positive, default_value_t = qdiscrim::linalg::PSD_TOL)]
    pub tol_psd: f64,
    /// Tolerance for the orthogonality conditions.
    #[arg(long = "tol-ortho", global = true, value_parser = positive, default_value_t = qdiscrim::measurement::ORTHO_TOL)]
    pub tol_ortho: f64,
    /// Slack for the optimality certificate.
    #[arg(long = "tol-cert", global = true, value_parser = positive, default_value_t = qdiscrim::measurement::CERT_TOL)]
    pub tol_cert: f64,
    /// Exit with status 2 when any numerical-health warning is raised.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Output file for the JSON artifact (standard output if omitted).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Restrict every state to the span of all supports before computing.
    #[arg(long, global = true)]
    pub project_support: bool,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            psd: self.tol_psd,
            ortho: self.tol_ortho,
            cert: self.tol_cert,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("tolerance must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded random ensemble.
    Gen(GenArgs),
    /// Compute every bound for an ensemble or a directory of ensembles.
    Bounds(BoundsArgs),
    /// Evaluate the exact-attainment conditions.
    Check(InputArgs),
    /// Build a POVM and report its attainment gap.
    ConstructPovm(ConstructArgs),
    /// Run the numerical minimum-error oracle.
    Optimize(OptimizeArgs),
    /// Lower bound on the error of discriminating channels.
    Channels(ChannelArgs),
    /// Tabulate bounds against the oracle.
    Compare(CompareArgs),
    /// Search random ensembles for ones meeting every attainment condition.
    #[command(name = "search-cor1")]
    SearchCor1(SearchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Generator specification file; overrides the individual flags.
    #[arg(long, conflicts_with_all = ["kind", "dim", "m", "rank", "priors"])]
    pub spec: Option<PathBuf>,
    /// ginibre_full_rank, ginibre_rank_r, pure or block_orthogonal.
    #[arg(long, required_unless_present = "spec")]
    pub kind: Option<GeneratorKind>,
    #[arg(long, required_unless_present = "spec")]
    pub dim: Option<usize>,
    #[arg(long, required_unless_present = "spec")]
    pub m: Option<usize>,
    /// Rank of each state for ginibre_rank_r.
    #[arg(long)]
    pub rank: Option<usize>,
    /// `uniform` or a comma-separated list.
    #[arg(long, default_value = "uniform")]
    pub priors: PriorSpec,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// An .ens.json file or a directory of them.
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also write one CSV row per ensemble (`-` for standard output).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Try every choice of distinguished state for the upper bound.
    #[arg(long)]
    pub best_first: bool,
    /// POVM whose attainment gap is reported.
    #[arg(long, conflicts_with = "oracle")]
    pub povm: Option<PathBuf>,
    /// Run the oracle and report its value and attainment gap.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmMethod {
    /// Projectors onto the orthogonality subspaces.
    Theorem2,
    /// Square-root (pretty good) measurement.
    Srm,
    /// Optimal two-state measurement.
    Helstrom,
    /// Numerical optimum.
    Oracle,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "theorem2")]
    pub method: PovmMethod,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Stop once the success probability changes by less than this.
    #[arg(long, value_parser = positive, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ChannelArgs {
    /// Two or more .chan.json files.
    #[arg(required = true, num_args = 2..)]
    pub channels: Vec<PathBuf>,
    #[arg(long, default_value = "uniform")]
    pub priors: PriorSpec,
    #[arg(long, default_value_t = 20000)]
    pub samples: usize,
    /// Skip the local refinement of the best sample.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also write the table as CSV (`-` for standard output).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::from(exit::OK);
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(&cli) {
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("{}", w.to_json());
            }
            if cli.global.strict && !warnings.is_empty() {
                ExitCode::from(exit::STRICT)
            } else {
                ExitCode::from(exit::OK)
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<commands::Warning>, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => commands::gen(g, a),
        Command::Bounds(a) => commands::bounds(g, a),
        Command::Check(a) => commands::check(g, a),
        Command::ConstructPovm(a) => commands::construct_povm(g, a),
        Command::Optimize(a) => commands::optimize(g, a),
        Command::Channels(a) => commands::channels(g, a),
        Command::Compare(a) => commands::compare(g, a),
        Command::SearchCor1(a) => commands::search_cor1(g, a),
    }
}
