//! The `aara-fx` command line: analyze, run, verify and bench.

pub mod commands;
pub mod inputs;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use aara_fx::surface::CostMetric;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Error = 1,
    Unsolvable = 2,
    Exhausted = 3,
    Violation = 4,
    GoldenMismatch = 5,
}

#[derive(Debug, Parser)]
#[command(name = "aara-fx", version, about = "Linear resource bound analysis for programs with effect handlers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MetricArgs {
    /// Charge one unit per function call.
    #[arg(long)]
    pub tick_calls: bool,
    /// Charge one unit per handler installation and continuation resumption.
    #[arg(long)]
    pub tick_handlers: bool,
}

impl From<MetricArgs> for CostMetric {
    fn from(m: MetricArgs) -> CostMetric {
        CostMetric {
            tick_calls: m.tick_calls,
            tick_handlers: m.tick_handlers,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer resource bounds for one function or all of them.
    Analyze {
        file: PathBuf,
        entry: Option<String>,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run a function on a literal input on the abstract machine.
    Run {
        file: PathBuf,
        entry: String,
        /// Argument literal in the surface syntax.
        #[arg(long, default_value = "()")]
        input: String,
        /// Start with this many resources (e.g. `7` or `15/2`).
        #[arg(long, conflicts_with = "profile")]
        budget: Option<String>,
        /// Run with unlimited resources (the default).
        #[arg(long)]
        profile: bool,
        /// Write a CSV transition trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, env = "AARA_FX_STEP_LIMIT")]
        step_limit: Option<u64>,
        /// Skip the linearity pass and the type checker.
        #[arg(long)]
        unchecked: bool,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Compare the inferred bound against the machine on random inputs.
    Verify {
        file: PathBuf,
        /// Defaults to the entry named in the adjacent golden file.
        entry: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "AARA_FX_STEP_LIMIT")]
        step_limit: Option<u64>,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Analyze every corpus program and compare with its golden file.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
        /// Timing trials per program.
        #[arg(long, default_value_t = 10)]
        trials: u32,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                Exit::Error as u8
            } else {
                let _ = write!(out, "{text}");
                Exit::Ok as u8
            };
        }
    };
    let code = match cli.command {
        Command::Analyze {
            file,
            entry,
            metric,
            json,
        } => commands::analyze(&file, entry.as_deref(), metric.into(), json, out, err),
        Command::Run {
            file,
            entry,
            input,
            budget,
            profile: _,
            trace,
            step_limit,
            unchecked,
            metric,
        } => commands::run(
            &commands::RunArgs {
                file,
                entry,
                input,
                budget,
                trace,
                step_limit,
                unchecked,
                metric: metric.into(),
            },
            out,
            err,
        ),
        Command::Verify {
            file,
            entry,
            trials,
            seed,
            json,
            step_limit,
            metric,
        } => commands::verify(
            &commands::VerifyArgs {
                file,
                entry,
                trials,
                seed,
                json,
                step_limit,
                metric: metric.into(),
            },
            out,
            err,
        ),
        Command::Bench { dir, json, trials } => commands::bench(&dir, json, trials, out, err),
    };
    code as u8
}
