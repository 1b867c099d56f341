//! `ouldp`: large-deviation rates, concentration bounds and Monte Carlo
//! checks for the Ornstein-Uhlenbeck drift estimator.
//!
//! Every command prints one JSON object on stdout. Exit status is 0 on
//! success, 1 on domain, convergence or simulation errors (and failed
//! checks), 2 on usage errors.

mod commands;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "OULDP_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ouldp",
    version,
    about = "Large deviations and concentration for the OU drift MLE"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct RunArgs {
    /// Seed of the counter-based path streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// L_T: exponent a√T X_T + b S_T.
    V,
    /// Λ_T: exponent a X_T² + b S_T.
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiMethodArg {
    Numeric,
    Corollary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EventArg {
    MleGe,
    MleLe,
    AbsDevGe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plain,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Duality,
    Contraction,
    CameronMartin,
    CgfMc,
    Continuity,
    LdpSlopes,
    CiDominance,
    Corollary,
    Stochastic,
    Laplace,
    All,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct EventArgs {
    #[arg(long, value_enum)]
    pub event: EventArg,
    /// `c` for the MLE events, `x` for the absolute deviation.
    #[arg(long)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "plain")]
    pub estimator: EstimatorArg,
    /// Sampling drift of the tilted estimator; defaults to the threshold.
    #[arg(long)]
    pub theta_sim: Option<f64>,
    /// Paths per horizon.
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and report X_T, S_T, the MLE and the couple statistic.
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long)]
        theta: f64,
        #[arg(long = "T")]
        horizon: f64,
        /// Grid steps; default max(1000, ceil(100|θ|T)).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// The drift MLE from sufficient statistics.
    #[command(allow_negative_numbers = true)]
    Mle {
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        x_t: f64,
        #[arg(long)]
        s_t: f64,
    },
    /// Finite-horizon or limiting cumulant generating function.
    #[command(allow_negative_numbers = true)]
    Cgf {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(
            long = "T",
            required_unless_present = "limit",
            conflicts_with = "limit"
        )]
        horizon: Option<f64>,
        /// Evaluate the T → ∞ limit.
        #[arg(long)]
        limit: bool,
        #[arg(long, value_enum, default_value = "v")]
        variant: Variant,
    },
    /// Closed-form rate: MLE rate with --z, joint rate with --x and --y.
    #[command(allow_negative_numbers = true)]
    Rate {
        #[arg(long)]
        theta: f64,
        #[arg(long, conflicts_with_all = ["x", "y"], required_unless_present_all = ["x", "y"])]
        z: Option<f64>,
        #[arg(long, requires = "y")]
        x: Option<f64>,
        #[arg(long, requires = "x")]
        y: Option<f64>,
    },
    /// Numerical Legendre transform of the limiting CGF.
    #[command(allow_negative_numbers = true)]
    Legendre {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// MLE rate by contraction of the joint rate.
    #[command(allow_negative_numbers = true)]
    Contract {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        z: f64,
    },
    /// Concentration bound on P(|θ̂_T − θ| ≥ x).
    #[command(allow_negative_numbers = true)]
    CiBound {
        #[arg(long)]
        theta: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value = "numeric")]
        method: CiMethodArg,
    },
    /// Upper bound on E[exp(b S_T)] for b < 0.
    #[command(allow_negative_numbers = true)]
    LaplaceBound {
        #[arg(long)]
        theta: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        b: f64,
    },
    /// Monte Carlo tail probability of the MLE.
    #[command(allow_negative_numbers = true)]
    McTail {
        #[arg(long)]
        theta: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        event: EventArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Empirical decay rate of a tail probability over a ladder of horizons.
    #[command(allow_negative_numbers = true)]
    LdpSlope {
        #[arg(long)]
        theta: f64,
        /// Comma-separated horizons.
        #[arg(long = "T", value_delimiter = ',', required = true)]
        ladder: Vec<f64>,
        #[command(flatten)]
        event: EventArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run property suites.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Paths for the Monte Carlo suites; defaults to the acceptance sizes.
        #[arg(long)]
        paths: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate a command over a Cartesian grid and emit CSV.
    ///
    /// Axes are written `--name start..stop x count` or `--name {v1,v2,...}`;
    /// other flags are passed
    /// through unchanged. `--csv PATH` writes the table to a file.
    #[command(allow_hyphen_values = true)]
    Sweep {
        target: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        rest: Vec<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Mle { .. } => "mle",
            Command::Cgf { .. } => "cgf",
            Command::Rate { .. } => "rate",
            Command::Legendre { .. } => "legendre",
            Command::Contract { .. } => "contract",
            Command::CiBound { .. } => "ci-bound",
            Command::LaplaceBound { .. } => "laplace-bound",
            Command::McTail { .. } => "mc-tail",
            Command::LdpSlope { .. } => "ldp-slope",
            Command::Check { .. } => "check",
            Command::Sweep { .. } => "sweep",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Command::Simulate { run, .. }
            | Command::McTail { run, .. }
            | Command::LdpSlope { run, .. }
            | Command::Check { run, .. } => run.seed,
            _ => 0,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let seed = cli.command.seed();
    match cli.command {
        Command::Sweep { target, rest } => sweep::run(&target, &rest),
        command => match commands::execute(command) {
            Ok(outcome) => {
                println!("{}", outcome.record.to_json(name));
                if outcome.success {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => report_error(name, seed, &e),
        },
    }
}

pub fn report_error(command: &str, seed: u64, e: &CliError) -> ExitCode {
    println!("{}", e.to_json(command, seed));
    eprintln!("error: {}", e.message);
    ExitCode::from(1)
}
