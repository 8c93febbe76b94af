use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ltpdr::run::{collect_paths, EXIT_ERROR, EXIT_FALSE, EXIT_MISMATCH, EXIT_OPEN, EXIT_TRUE};
use ltpdr::{run, Engine, Kind, RunError, RunRequest};
use ltpdr_core::engine::{RunOptions, Schedule};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleArg {
    Default,
    Fuzz,
}

/// Property-directed reachability over Kripke structures, MDPs and Markov
/// reward models.
///
/// Exit status: 0 True, 10 False, 2 BudgetExhausted or Stuck, 3 witness or
/// oracle mismatch, 1 usage, parse or I/O error. With several models the
/// most severe status wins (3, then 1, 2, 10, 0).
#[derive(Debug, Parser)]
#[command(name = "ltpdr", version)]
struct Cli {
    /// Model files (.kr, .mdp, .mrm) or directories of them.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Instance kind; inferred from the extension by default (.kr is kripke-forward).
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, value_enum, default_value = "combined")]
    engine: Engine,
    /// Maximum number of engine steps.
    #[arg(long, default_value_t = ltpdr_core::engine::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value = "default")]
    schedule: ScheduleArg,
    /// Seed for the fuzz schedule.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the threshold of .mdp and .mrm models (`inf` allowed for .mrm).
    #[arg(long)]
    lambda: Option<f64>,
    /// Print one line per rule application to stderr.
    #[arg(long, env = "LTPDR_TRACE", action = clap::ArgAction::SetTrue, value_parser = clap::builder::FalseyValueParser::new())]
    trace: bool,
    /// Re-check sequence invariants after every step.
    #[arg(long)]
    check_invariants: bool,
    /// Re-check the witness with the lattice validators.
    #[arg(long)]
    validate_witness: bool,
    /// Cross-check the verdict against BFS or value iteration.
    #[arg(long)]
    oracle: bool,
    /// One JSON object per model instead of text.
    #[arg(long)]
    json: bool,
}

fn severity(code: i32) -> u8 {
    match code {
        EXIT_MISMATCH => 4,
        EXIT_ERROR => 3,
        EXIT_OPEN => 2,
        EXIT_FALSE => 1,
        _ => 0,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { EXIT_TRUE as u8 });
        }
    };
    let paths = match collect_paths(&cli.paths) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let schedule = match cli.schedule {
        ScheduleArg::Default => Schedule::Default,
        ScheduleArg::Fuzz => Schedule::Fuzz { seed: cli.seed },
    };
    let many = paths.len() > 1;
    let requests: Vec<RunRequest> = paths
        .iter()
        .map(|path| RunRequest {
            path: path.clone(),
            kind: cli.kind,
            engine: cli.engine,
            options: RunOptions {
                budget: cli.budget,
                schedule,
                check_invariants: cli.check_invariants,
            },
            lambda: cli.lambda,
            trace: cli.trace,
            validate_witness: cli.validate_witness,
            oracle: cli.oracle,
        })
        .collect();
    let results: Vec<Result<ltpdr::Report, RunError>> = requests
        .par_iter()
        .map(|r| {
            let prefix = r.path.display().to_string();
            run(r, many.then_some(prefix.as_str()))
        })
        .collect();

    let mut code = EXIT_TRUE;
    for (path, result) in paths.iter().zip(results) {
        let this = match result {
            Ok(report) => {
                if cli.json {
                    println!("{}", report.to_json());
                } else {
                    if many {
                        println!("== {} ==", path.display());
                    }
                    print!("{}", report.to_text());
                }
                report.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        };
        if severity(this) > severity(code) {
            code = this;
        }
    }
    ExitCode::from(code as u8)
}
