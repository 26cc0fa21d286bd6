use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "hslab",
    version,
    about = "Radial Hardy-Sobolev experiments: constants, extremals, solves, scans"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponents, Hardy constant and (with --best) the radial best constants.
    Constants {
        #[command(flatten)]
        common: Common,
        /// Also minimize for K(n,p,mu,0), K(n,p,mu,s) and the threshold c*.
        #[arg(long)]
        best: bool,
    },
    /// Minimize the Hardy-Sobolev quotient over radial profiles.
    Extremal(Common),
    /// Critical point of the double-critical functional.
    Solve(Common),
    /// Dilation identity and Pohozaev functional of a profile.
    Pohozaev {
        #[command(flatten)]
        common: Common,
        /// Annular cutoff parameter for the identity and localized functional.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Perturbed problem with a |u|^{q-2}u term for several q.
    ScanQ {
        #[command(flatten)]
        common: Common,
        /// Comma-separated q values (default p, p*, p*+1).
        #[arg(long, value_delimiter = ',')]
        q_values: Option<Vec<f64>>,
    },
    /// Hardy quotient of a translated profile (mu <= 0, s = 0).
    Translate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Ball integrals along a bubbling sequence and the ratio checks.
    Concentrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
    },
    /// One solve or extremal per (mu, s) cell; CSV rows with a status column.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        mus: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        ss: Option<Vec<f64>>,
        /// `solve` or `extremal`.
        #[arg(long)]
        task: Option<String>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Constants { common, .. }
            | Command::Pohozaev { common, .. }
            | Command::ScanQ { common, .. }
            | Command::Translate { common, .. }
            | Command::Concentrate { common, .. }
            | Command::Sweep { common, .. } => common,
            Command::Extremal(common) | Command::Solve(common) => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::Extremal(_) => "extremal",
            Command::Solve(_) => "solve",
            Command::Pohozaev { .. } => "pohozaev",
            Command::ScanQ { .. } => "scan-q",
            Command::Translate { .. } => "translate",
            Command::Concentrate { .. } => "concentrate",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Flags shared by every command. Unset flags fall back to the config file,
/// then to the defaults.
#[derive(Debug, Args)]
pub struct Common {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for generated test profiles.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table path for commands that produce one.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the computed profile here.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    /// Read the input profile from here instead of generating one.
    #[arg(long)]
    pub profile_in: Option<PathBuf>,
    /// Add wall time to the report (makes reports non-reproducible).
    #[arg(long)]
    pub timing: bool,
}
