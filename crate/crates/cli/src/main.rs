//! Batch front end: run problem files, verify identities, drive the fuzz
//! corpus. Exit status 0 means every verification passed, 1 a verification
//! failure, 2 an input error.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use polydisc::corpus::{run_corpus, CorpusParams};
use polydisc::problem::{ProblemFile, Task};
use polydisc::report::{execute, render_text};

#[derive(Parser)]
#[command(
    name = "polydisc",
    about = "Exact regularization of divergent integrals on the unit polydisc",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the tasks listed in a problem file.
    Run {
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Exponential truncation order for the oracle (defaults to kappa).
        #[arg(long)]
        truncation: Option<u32>,
    },
    /// Run the full verification battery on a problem file.
    Verify {
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Generate random instances and check every identity on each.
    Fuzz {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        max_exp: u32,
        #[arg(long, default_value_t = 3)]
        max_deg: u32,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Also run the metric-dependence battery on every instance.
        #[arg(long, default_value_t = false)]
        deep: bool,
    },
}

fn input_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn run_file(path: &str, format: Format, truncation: Option<u32>, force_verify: bool) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return input_error(&format!("{path}: {e}")),
    };
    let mut problem = match ProblemFile::parse(&text) {
        Ok(p) => p,
        Err(e) => return input_error(&format!("{path}: {e}")),
    };
    if force_verify {
        problem.tasks = vec![Task::VerifyAll];
    }
    let started = Instant::now();
    let report = match execute(&problem, truncation) {
        Ok(r) => r,
        Err(e) => return input_error(&format!("{path}: {e}")),
    };
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        ),
        Format::Text => print!("{}", render_text(&report)),
    }
    eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            file,
            format,
            truncation,
        } => run_file(&file, format, truncation, false),
        Command::Verify { file, format } => run_file(&file, format, None, true),
        Command::Fuzz {
            dim,
            max_exp,
            max_deg,
            count,
            seed,
            format,
            deep,
        } => {
            if dim == 0 || count == 0 {
                return input_error("dim and count must be positive");
            }
            let params = CorpusParams {
                max_dim: dim,
                max_exp,
                max_deg,
            };
            let started = Instant::now();
            let results = run_corpus(&params, count, seed, deep);
            let passed = results.iter().filter(|r| r.pass).count();
            match format {
                Format::Json => {
                    let report = serde_json::json!({
                        "count": count,
                        "seed": seed,
                        "passed": passed,
                        "instances": results,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("reports serialize")
                    );
                }
                Format::Text => {
                    println!("{passed}/{count} instances passed (seed {seed})");
                    for r in results.iter().filter(|r| !r.pass) {
                        println!("instance {} FAILED:", r.index);
                        for c in r.checks.iter().filter(|c| !c.pass) {
                            println!("  {}: {}", c.name, c.detail);
                        }
                        if let Some(cx) = &r.counterexample {
                            println!("  shrunk counterexample:\n{}", cx.to_json());
                        }
                    }
                }
            }
            eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
            if passed == count {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
