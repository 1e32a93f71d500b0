use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "glm", version, about = "General linear methods with built-in global error estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[arg(long)]
    pub problem: String,
    /// Problem parameter override, repeatable: --param kappa=1
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub tend: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List catalog methods.
    ListMethods {
        #[command(flatten)]
        output: Output,
    },
    /// List test problems with their parameters and default intervals.
    ListProblems {
        #[command(flatten)]
        output: Output,
    },
    /// Check consistency, order and decoupling of a method.
    Verify {
        /// Catalog name, or a path to a tableau JSON file.
        #[arg(long)]
        method: String,
        /// Print residuals per rooted tree.
        #[arg(long)]
        verbose: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Integrate one problem and write the step trace.
    Integrate {
        #[arg(long)]
        method: String,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Fixed step, or the initial step with --tol-local, or the pilot step with --tol-global.
        #[arg(long)]
        dt: f64,
        /// Adapt the step to keep the local error estimate near this value.
        #[arg(long, conflicts_with = "tol_global")]
        tol_local: Option<f64>,
        /// Run a pilot at --dt, then rerun at the step predicted to meet this global error.
        #[arg(long)]
        tol_global: Option<f64>,
        #[arg(long)]
        dt_min: Option<f64>,
        #[arg(long)]
        dt_max: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Final-time errors over a list of step sizes, with fitted slopes.
    Convergence {
        #[arg(long)]
        method: String,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated descending step sizes.
        #[arg(long = "dt-list", visible_alias = "dt", value_delimiter = ',', required = true)]
        dt_list: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Spectral radius of the stability matrix over a grid.
    StabilityRegion {
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
        re_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        re_max: f64,
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        im_min: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        im_max: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Order to which the stability function vanishes along w = exp(z).
    StabilityOrder {
        #[arg(long)]
        method: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Build a GL tableau from a Runge-Kutta method and print it as JSON.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        /// Base method: a dense-output entry for solcor, any RK entry for extrap.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun one of the reference experiments and write its CSV files.
    Reproduce {
        figure: String,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    /// Solving for the correction with the method's dense output.
    Solcor,
    /// Step-doubling extrapolation.
    Extrap,
}
