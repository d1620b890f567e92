//! Batch front end for the descent solvers.
//!
//! Subcommands: `solve` (run a problem file, write the iteration trace),
//! `check` (run property checks against a solved instance), `compare`
//! (paired-iteration and paired-inequality comparisons), `gen` (seeded
//! problem files). Exit codes: 0 success, 1 error, 2 iteration cap.

mod commands;
mod problem;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "afmin",
    version,
    about = "Descent solvers for linear inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file; writes the trace CSV and prints the outcome
    Solve {
        /// Problem file path
        #[arg(long)]
        file: PathBuf,
        /// Trace output path (default: <file stem>.trace.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Landweber step size override
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        f_tol: Option<f64>,
        #[arg(long)]
        step_tol: Option<f64>,
        /// Refuse KL-family matrices with zero entries (default: warn only)
        #[arg(long)]
        strict_positivity: bool,
    },
    /// Solve, then verify named properties; writes a report CSV
    Check {
        #[arg(long)]
        file: PathBuf,
        /// Report output path (default: <file stem>.report.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated property list (see README for names)
        #[arg(long, conflicts_with = "all")]
        props: Option<String>,
        /// Run every property applicable to the family
        #[arg(long)]
        all: bool,
        /// Samples per sampled check (default 200)
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for sample generation (default: file seed, then 42)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        f_tol: Option<f64>,
        #[arg(long)]
        step_tol: Option<f64>,
        /// Refuse KL-family matrices with zero entries (default: warn only)
        #[arg(long)]
        strict_positivity: bool,
    },
    /// Euclid: paired landweber/relaxation iterates. Hellinger: paired
    /// distance-drop inequality slacks.
    Compare {
        #[arg(long)]
        file: PathBuf,
        /// Comparison output path (default: <file stem>.compare.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iterations to compare (default 50)
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Generate a seeded problem file
    Gen {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// One of: euclid, landweber, smart, emml, hellinger, pearson
        #[arg(long)]
        family: String,
        #[arg(long)]
        seed: u64,
        /// Make the data an exact product of the matrix with a hidden vector
        #[arg(long)]
        consistent: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve {
            file,
            out,
            gamma,
            max_iters,
            f_tol,
            step_tol,
            strict_positivity,
        } => commands::cmd_solve(
            &file,
            out,
            gamma,
            max_iters,
            f_tol,
            step_tol,
            strict_positivity,
        ),
        Command::Check {
            file,
            out,
            props,
            all,
            samples,
            seed,
            max_iters,
            f_tol,
            step_tol,
            strict_positivity,
        } => commands::cmd_check(
            &file,
            out,
            props,
            all,
            samples,
            seed,
            max_iters,
            f_tol,
            step_tol,
            strict_positivity,
        ),
        Command::Compare { file, out, iters } => commands::cmd_compare(&file, out, iters),
        Command::Gen {
            rows,
            cols,
            family,
            seed,
            consistent,
            out,
        } => commands::cmd_gen(rows, cols, &family, seed, consistent, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
