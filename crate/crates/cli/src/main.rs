use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cmray::numeric::PrecisionContext;
use cmray::report::{self, CheckResult, Report};
use cmray::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cmray", version, about = "Ray class fields of imaginary quadratic fields via CM values")]
struct Cli {
    /// Working precision in decimal digits
    #[arg(long, global = true, default_value_t = 100, env = "CMRAY_DIGITS")]
    digits: u32,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock time in the report
    #[arg(long, global = true)]
    timing: bool,
    #[arg(long, global = true, default_value_t = 20240)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Class number, units and splitting of small primes
    Field {
        #[arg(long, allow_hyphen_values = true)]
        dk: i64,
    },
    /// Structure of the ray class group modulo N
    Rayclass {
        #[arg(long, allow_hyphen_values = true)]
        dk: i64,
        #[arg(short = 'N', long = "n")]
        n: i64,
        /// Also run the order and degree cross-checks
        #[arg(long)]
        check: bool,
    },
    /// Fricke values and Siegel logarithms for every ray class
    Table {
        #[arg(long, allow_hyphen_values = true)]
        dk: i64,
        #[arg(short = 'N', long = "n")]
        n: i64,
    },
    /// Run a verification suite
    Verify {
        suite: Suite,
        #[arg(long, allow_hyphen_values = true, default_value_t = -20)]
        dk: i64,
        #[arg(short = 'N', long = "n", default_value_t = 5)]
        n: i64,
        /// Number of Dirichlet coefficients for the L-series
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: usize,
        #[arg(long, default_value_t = 500)]
        max_n: i64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    FrickeSiegel,
    Kronecker,
    Decomposition,
    CaseConstants,
    /// Admissibility of the chosen t for every N up to --max-n
    #[value(alias = "table1")]
    ChoiceOfT,
    Main,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Indeterminate | Error::PrecisionExhausted(_) => 3,
        _ => 2,
    }
}

fn info_report(command: &str, config: Value, info: Value, checks: Vec<CheckResult>) -> Report {
    let mut results = vec![CheckResult { name: "info".into(), inputs: Value::Null, values: info, residual: None, tolerance: None, pass: true }];
    results.extend(checks);
    Report::new(command, config, results, None)
}

fn run(cli: &Cli) -> cmray::Result<Output> {
    let ctx = || PrecisionContext::new(cli.digits);
    Ok(match &cli.command {
        Command::Field { dk } => Output::Report(info_report("field", json!({"d_k": dk}), report::field_info(*dk)?, vec![])),
        Command::Rayclass { dk, n, check } => {
            let (info, checks) = report::rayclass_info(*dk, *n)?;
            let checks = if *check { checks } else { vec![] };
            Output::Report(info_report("rayclass", json!({"d_k": dk, "n": n}), info, checks))
        }
        Command::Table { dk, n } => {
            let ctx = ctx()?;
            match cli.format {
                Format::Json => Output::Text(serde_json::to_string_pretty(&report::table_json(*dk, *n, &ctx)?).expect("json")),
                Format::Csv => Output::Text(report::table_csv(*dk, *n, &ctx)?),
            }
        }
        Command::Verify { suite, dk, n, cutoff, max_n, samples } => {
            let ctx = ctx()?;
            let (name, config, results) = match suite {
                Suite::FrickeSiegel => {
                    ("fricke-siegel", json!({"seed": cli.seed, "samples": samples}), report::suite_fricke_siegel(cli.seed, *samples, &ctx)?)
                }
                Suite::Kronecker => ("kronecker", json!({"d_k": dk, "n": n, "cutoff": cutoff}), report::suite_kronecker(*dk, *n, *cutoff, &ctx)?),
                Suite::Decomposition => ("decomposition", json!({"d_k": dk, "n": n}), report::suite_decomposition(*dk, *n, &ctx)?),
                Suite::CaseConstants => ("case-constants", json!({"d_k": dk, "n": n}), report::suite_case_constants(*dk, *n, &ctx)?),
                Suite::ChoiceOfT => ("choice-of-t", json!({"max_n": max_n}), report::suite_choice_of_t(*max_n)?),
                Suite::Main => ("main", json!({"d_k": dk, "n": n}), report::suite_main(*dk, *n, &ctx)?),
            };
            let precision = if matches!(suite, Suite::ChoiceOfT) { None } else { Some(&ctx) };
            Output::Report(Report::new(&format!("verify {name}"), config, results, precision))
        }
    })
}

enum Output {
    Report(Report),
    Text(String),
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(s: String) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().expect("thread pool set once");
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(Output::Text(s)) => {
            emit(if s.ends_with('\n') { s } else { s + "\n" });
            ExitCode::SUCCESS
        }
        Ok(Output::Report(mut r)) => {
            if cli.timing {
                r.timing = Some(start.elapsed().as_secs_f64());
            }
            match cli.format {
                Format::Json => emit(serde_json::to_string_pretty(&r).expect("json") + "\n"),
                Format::Csv => emit(r.to_csv()),
            }
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
