//! `dimkit` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit code for unusable input: bad flags, unreadable or malformed files.
pub const INPUT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "dimkit", version, about = "Dominating induced matchings: solve, verify, generate, cross-check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    /// Search for an induced P9 before solving.
    #[arg(long)]
    pub check_p9: bool,
    /// Branch budget per search (default max(n^2, 256)).
    #[arg(long, value_name = "N")]
    pub budget_branches: Option<u64>,
    /// Seed budget per piece (default max(3, largest family)).
    #[arg(long, value_name = "N")]
    pub budget_seeds: Option<usize>,
    /// Hand inconclusive instances on at most N vertices to the exhaustive oracle.
    #[arg(long, value_name = "N")]
    pub oracle_max_n: Option<usize>,
    /// Fill in wall-clock milliseconds (makes reports time-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a graph has a dominating induced matching.
    Solve {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Check a matching file against a graph.
    Verify {
        graph: PathBuf,
        matching: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive search, independent of the solver.
    Oracle {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
        /// Count every d.i.m. instead of stopping at the first.
        #[arg(long)]
        all: bool,
        /// Give up after this many search nodes.
        #[arg(long, value_name = "N")]
        node_limit: Option<u64>,
    },
    /// Generate instances.
    Gen(GenArgs),
    /// Report forbidden patterns, forced edges and P9-freeness.
    Check {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare the solver against the oracle on random graphs or a corpus.
    CrossCheck {
        /// Directory of `.graph` files to use instead of random graphs.
        #[arg(long, value_name = "DIR")]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Time the solver on planted instances of growing size; CSV on stdout.
    Bench {
        #[arg(long, default_value_t = 2000)]
        max_n: usize,
        /// Instances per size.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use planted instances with a C4 attached, which have no d.i.m.
        #[arg(long)]
        no_dim_family: bool,
        /// Also write `bench.csv` into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Dump the solver's decomposition and rule firings as JSON.
    Explain {
        graph: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Graph with a planted d.i.m.
    Planted,
    /// Planted graph with a C4 attached, so no d.i.m. exists.
    NoDim,
    /// Random graph with optional class filters.
    Random,
    /// Every connected graph up to --max-n vertices, labeled by the oracle.
    Small,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Matched pairs (default n/5).
    #[arg(long)]
    pub k: Option<usize>,
    /// Extra white-black edges (default 3n/2, capped by capacity).
    #[arg(long)]
    pub extra: Option<usize>,
    /// Edge probability for random graphs.
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 7)]
    pub max_n: usize,
    /// Write instances and `manifest.jsonl` here instead of printing.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Repair connectivity of planted graphs.
    #[arg(long)]
    pub connected: bool,
    /// Label generated graphs with their P9-freeness.
    #[arg(long)]
    pub check_p9: bool,
    #[arg(long)]
    pub k4_free: bool,
    #[arg(long)]
    pub diamond_butterfly_free: bool,
    #[arg(long)]
    pub p9_free: bool,
    #[arg(long, default_value_t = 10_000)]
    pub max_attempts: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(INPUT_ERROR),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
