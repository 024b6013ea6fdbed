//! Command-line front end for the benchmark toolkit: demand-to-benchmark
//! synthesis, ten-criterion evaluation, judge-score debiasing, ranking
//! reliability checks, and format conversion.
//!
//! Exit contract: `0` success (including `--help`/`--version`), `2` for
//! usage and input-validation errors, `1` for runtime failures (provider
//! trouble, degenerate data, unwritable outputs).

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "benchforge",
    version,
    about = "Synthesize, evaluate, and stress-test multiple-choice benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a benchmark from a free-text assessment demand
    Generate(commands::generate::GenerateArgs),
    /// Score a benchmark under the ten-criterion framework
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Fit per-generator judge scores free of judge-verbosity bias
    Debias(commands::debias::DebiasArgs),
    /// Test whether an accuracy gap survives answer noise
    Reliability(commands::reliability::ReliabilityArgs),
    /// Convert a benchmark to another format
    Convert(commands::convert::ConvertArgs),
    /// Expand a terse assessment demand into a detailed one
    RewriteDemand(commands::rewrite::RewriteDemandArgs),
}

/// A command failure carrying its exit code: usage errors ask the user to
/// fix the invocation (2), runtime errors report work that went wrong (1).
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self::Usage(error.into())
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self::Runtime(error.into())
    }

    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Self::Usage(error) | Self::Runtime(error) => error,
        }
    }
}

/// Shorthand for classifying fallible steps.
pub(crate) trait FailExt<T> {
    /// The error means the invocation or its input files need fixing.
    fn or_usage(self) -> Result<T, Failure>;
    /// The error means the work itself went wrong.
    fn or_runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> FailExt<T> for Result<T, E> {
    fn or_usage(self) -> Result<T, Failure> {
        self.map_err(Failure::usage)
    }

    fn or_runtime(self) -> Result<T, Failure> {
        self.map_err(Failure::runtime)
    }
}

/// Run a future on a fresh multi-thread runtime; the process runs one
/// command, so one runtime per invocation is plenty.
pub(crate) fn block_on<T>(future: impl std::future::Future<Output = T>) -> Result<T, Failure> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::runtime(anyhow::Error::new(e).context("cannot start async runtime")))?;
    Ok(runtime.block_on(future))
}

/// Entry point for the binary: parse `std::env` arguments and run.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Parse the given arguments (element 0 is the program name) and run the
/// selected command, returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            failure.code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate(args) => commands::generate::run(&args),
        Command::Evaluate(args) => commands::evaluate::run(&args),
        Command::Debias(args) => commands::debias::run(&args),
        Command::Reliability(args) => commands::reliability::run(&args),
        Command::Convert(args) => commands::convert::run(&args),
        Command::RewriteDemand(args) => commands::rewrite::run(&args),
    }
}
