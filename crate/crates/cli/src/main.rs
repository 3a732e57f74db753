//! `dast`: tail-adjusted boxplots, QQ and diagnostic plots, and Monte Carlo
//! studies of the DAST outlier detector.

mod commands;
mod data;
mod error;
mod report;
mod settings;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dast_core::{LowerTransform, QqKind, Tail};

use crate::settings::{CountList, InjectionShape, RealList};

#[derive(Parser, Debug)]
#[command(
    name = "dast",
    version,
    about = "Extreme-value outlier detection with tail-adjusted boxplots",
    after_help = "Every flag can also be set in a --config file as `name=value` \
                  (without the leading dashes); flags win over the file."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Configuration file with one `key=value` per line
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for parallel work (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write to this file instead of stdout
    #[arg(long, short, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    /// CSV file with a header row
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Column name, or 1-based column number
    #[arg(long)]
    column: Option<String>,
    /// Half-width of the uniform noise added to break ties [default: 0.01]
    #[arg(long)]
    dither: Option<f64>,
    /// Seed for all randomness [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct DetectArgs {
    /// Top order statistics used by the test statistics
    #[arg(long)]
    k: Option<usize>,
    /// Top order statistics used by the tail-index estimates
    #[arg(long)]
    kstar: Option<usize>,
    /// Largest number of outliers considered [default: factor * kstar^exponent]
    #[arg(long)]
    k0star: Option<usize>,
    /// Factor of the default k0star rule [default: 7]
    #[arg(long)]
    k0_factor: Option<f64>,
    /// Exponent of the default k0star rule [default: 1/3]
    #[arg(long)]
    k0_exponent: Option<f64>,
    /// Maximum number of outlier regimes [default: 1]
    #[arg(long)]
    regimes: Option<usize>,
    /// Decay of the level schedule [default: 1.2]
    #[arg(long)]
    a: Option<f64>,
    /// Family-wise level [default: 0.05]
    #[arg(long)]
    q: Option<f64>,
    /// Known tail index, replacing both estimates
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// upper, lower or both [default: both]
    #[arg(long)]
    tail: Option<Tail>,
    /// Lower-tail mapping: auto, reciprocal or negate [default: auto]
    #[arg(long)]
    lower_transform: Option<LowerTransform>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// t, burr, lognormal, normal, weibull, beta, reverse-burr or pareto
    #[arg(long)]
    dist: Option<String>,
    /// Comma-separated family parameters, e.g. 1,0.5,4
    #[arg(long, allow_negative_numbers = true)]
    params: Option<RealList>,
    /// Sample size [default: 1000]
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo replications [default: 500]
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tail-adjusted boxplot analysis as a JSON report
    Analyze {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Boxplot geometry as CSV or SVG
    Boxplot {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        detect: DetectArgs,
        /// csv or svg [default: csv]
        #[arg(long)]
        format: Option<commands::Format>,
    },
    /// Exponential, Pareto or generalized QQ-plot
    Qqplot {
        #[command(flatten)]
        data: DataArgs,
        /// exponential, pareto or generalized [default: generalized]
        #[arg(long)]
        kind: Option<QqKind>,
        /// Fit a line through the top k points (SVG only)
        #[arg(long)]
        k: Option<usize>,
        /// csv or svg [default: csv]
        #[arg(long)]
        format: Option<commands::Format>,
    },
    /// Trimmed generalized Hill estimates against the trimming level
    Diagnostic {
        #[command(flatten)]
        data: DataArgs,
        /// One curve per value, e.g. 100,200
        #[arg(long)]
        k: Option<CountList>,
        /// Largest trimming level [default: 7 * k^(1/3)]
        #[arg(long)]
        k0max: Option<usize>,
        /// csv or svg [default: csv]
        #[arg(long)]
        format: Option<commands::Format>,
    },
    /// Type 1 error and outlier-count statistics over a grid of cells
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Values of k, e.g. 200,400 or 100:600:100
        #[arg(long)]
        k: Option<CountList>,
        /// Values of kstar
        #[arg(long)]
        kstar: Option<CountList>,
        #[arg(long)]
        k0star: Option<usize>,
        #[arg(long)]
        k0_factor: Option<f64>,
        #[arg(long)]
        k0_exponent: Option<f64>,
        #[arg(long)]
        regimes: Option<usize>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Known tail index
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        /// Use the model's true tail index as the known index
        #[arg(long)]
        xi_known: bool,
        /// Injected block, exp:K0 or scl:K0
        #[arg(long)]
        inject: Option<InjectionShape>,
        /// Injection intensities L or C, comma-separated [default: 1]
        #[arg(long)]
        intensity: Option<RealList>,
        /// Tie-breaking noise added to each replication [default: 0]
        #[arg(long)]
        dither: Option<f64>,
    },
    /// Monte Carlo variance of the generalized Hill estimator over a k grid
    Kopt {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid of k, e.g. 100:600:50
        #[arg(long)]
        grid: Option<CountList>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dast: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
