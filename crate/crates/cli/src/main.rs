use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use aspmtqs_cli::{run, run_corpus, Format, Mode, RunConfig};
use aspmtqs::smt::SolverConfig;
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Human,
    Structured,
}

/// Solve spatial logic programs with an SMT solver.
///
/// Exit codes: 10 SAT, 20 UNSAT, 30 UNKNOWN, 1 error. With --entails,
/// 20 means entailed and 10 not entailed. --oracle-check exits 0 when the
/// stable models match the completion models and 40 otherwise. A directory
/// argument runs the corpus and exits nonzero on any mismatch.
#[derive(Debug, Parser)]
#[command(name = "aspmtqs", version)]
struct Cli {
    /// Program file, or a directory of programs with `.expected` sidecars.
    input: Option<PathBuf>,
    #[arg(long, env = "ASPMTQS_SOLVER", default_value = "z3")]
    solver: String,
    /// Argument passed to the solver before the instance path; replaces
    /// the built-in defaults. Repeatable.
    #[arg(long, value_name = "ARG", allow_hyphen_values = true)]
    solver_arg: Vec<String>,
    /// Solver timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Check whether every stable model satisfies this formula.
    #[arg(long, value_name = "FORMULA", conflicts_with = "oracle_check")]
    entails: Option<String>,
    /// Compare brute-force stable models with completion models.
    #[arg(long)]
    oracle_check: bool,
    #[arg(long)]
    dump_ground: bool,
    #[arg(long)]
    dump_completion: bool,
    /// Write the SMT-LIB instance to this file.
    #[arg(long, value_name = "PATH")]
    dump_smt: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
    /// Parallel corpus jobs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Print the spatial relation catalog and exit.
    #[arg(long)]
    list_relations: bool,
    /// Report choice atoms that hold in every stable model.
    #[arg(long)]
    abduce: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_relations {
        for line in aspmtqs::qs::list_relations() {
            println!("{line}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(input) = cli.input else {
        eprintln!("error: no input file given");
        return ExitCode::from(1);
    };
    if !(cli.timeout.is_finite() && cli.timeout > 0.0) {
        eprintln!("error: --timeout must be a positive number of seconds");
        return ExitCode::from(1);
    }
    let timeout = Duration::from_secs_f64(cli.timeout);
    let mut solver = SolverConfig::new(&cli.solver, timeout);
    if !cli.solver_arg.is_empty() {
        solver.args = cli.solver_arg.clone();
    }
    let format = match cli.format {
        OutputFormat::Human => Format::Human,
        OutputFormat::Structured => Format::Structured,
    };
    if input.is_dir() {
        return match run_corpus(&input, &solver, cli.jobs) {
            Ok(summary) => {
                print!("{}", summary.render(format));
                ExitCode::from(summary.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    let mode = match (cli.entails, cli.oracle_check) {
        (Some(q), _) => Mode::Entail(q),
        (None, true) => Mode::OracleCheck,
        (None, false) => Mode::Solve,
    };
    let config = RunConfig {
        input,
        solver: cli.solver,
        solver_args: solver.args,
        timeout,
        mode,
        dump_ground: cli.dump_ground,
        dump_completion: cli.dump_completion,
        dump_smt: cli.dump_smt,
        format,
        abduce: cli.abduce,
    };
    let report = run(&config);
    print!("{}", report.render(format));
    ExitCode::from(report.exit_code() as u8)
}
