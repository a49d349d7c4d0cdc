//! `gap`: spectral-gap bounds, validation, weight certificates and DGSM
//! reports from the command line.
//!
//! Exit codes: 0 ok, 2 bad input, 3 no applicable bound, 4 a certified
//! lower bound exceeds a numerical reference.

mod commands;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gapcert::GapError;

use commands::Outcome;
use problem::{parse_weight, ProblemArgs};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Inapplicable(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Inapplicable(_) => 3,
            Failure::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Inapplicable(m) => write!(f, "not applicable: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

pub fn classify(e: GapError) -> Failure {
    match e {
        GapError::InvalidParameter(_)
        | GapError::Descriptor(_)
        | GapError::Samples(_)
        | GapError::Io(_)
        | GapError::Csv(_)
        | GapError::Json(_) => Failure::Input(e.to_string()),
        _ => Failure::Inapplicable(e.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "gap", version, about = "Certified lower bounds on Neumann spectral gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the JSON report here (atomically).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Every bound that applies to the problem.
    Bound {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bounds checked against numerical reference values.
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Multiply certified lower bounds by this factor (alarm self-test).
        #[arg(long, hide = true, value_name = "FACTOR")]
        inflate_lower: Option<f64>,
    },
    /// Check a weight certificate and report its bound.
    Certify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// identity or an inline JSON weight; defaults to the descriptor's.
        #[arg(long)]
        weight: Option<String>,
    },
    /// Sobol total-index upper bounds from DGSM samples.
    Gsa {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// CSV with header x1..xd,f,g1..gd.
        #[arg(long, value_name = "FILE")]
        csv: PathBuf,
        /// Use this bound method for λ instead of the largest certified one.
        #[arg(long, value_name = "METHOD")]
        lambda: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(Outcome, OutputArgs), Failure> {
    match cli.command {
        Command::Bound { problem, output } => Ok((commands::bound(&problem.resolve()?)?, output)),
        Command::Validate { problem, output, inflate_lower } => {
            Ok((commands::validate(&problem.resolve()?, inflate_lower)?, output))
        }
        Command::Certify { problem, output, weight } => {
            let p = problem.resolve()?;
            let w = match (weight, &p.desc.weight) {
                (Some(s), _) => parse_weight(&s)?,
                (None, Some(w)) => w.clone(),
                (None, None) => {
                    return Err(Failure::Input("certify needs --weight or a weight in the descriptor".into()))
                }
            };
            Ok((commands::certify(&p, &w)?, output))
        }
        Command::Gsa { problem, output, csv, lambda } => {
            Ok((commands::gsa(&problem.resolve()?, &csv, lambda.as_deref())?, output))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, output) = match run(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("gap: {e}");
            return ExitCode::from(e.code());
        }
    };
    if let Some(path) = &output.out {
        if let Err(e) = output::write_atomic(path, &outcome.json) {
            eprintln!("gap: {e}");
            return ExitCode::from(e.code());
        }
    }
    if output.json {
        print!("{}", outcome.json);
    } else {
        print!("{}", outcome.text);
    }
    match outcome.code {
        commands::EXIT_VIOLATION => eprintln!("gap: sandwich violated: a certified lower bound exceeds a reference"),
        commands::EXIT_INAPPLICABLE => eprintln!("gap: no applicable certified bound"),
        _ => {}
    }
    ExitCode::from(outcome.code)
}
