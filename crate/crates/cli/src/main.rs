use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bmvsim::config::OutputFormat;
use bmvsim::constants::Tolerances;
use bmvsim::error::Error;
use bmvsim::{output, run_sweep, simulate, verify, RunConfig};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "bmvsim", version, about = "Gravity-mediated entanglement of pendulum-suspended masses")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML). Defaults to the bundled parameter set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration under both dynamics models.
    Simulate,
    /// Evaluate the grid given in the `[sweep]` section.
    Sweep,
    /// Run the verification checks and print a pass/fail table.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Default,
    Strict,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::reference(),
    };
    if cli.tolerance_profile == Profile::Strict {
        config.tolerances = Tolerances::strict();
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(p) = &cli.output {
        config.output.path = Some(p.display().to_string());
    }
    config.resolve()?;
    Ok(config)
}

fn emit(text: &str, path: Option<&str>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(Path::new(p), text)
            .map_err(|e| Failure::Config(format!("output.path: cannot write {p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load(cli)?;
    let path = config.output.path.as_deref();
    match cli.command {
        Command::Simulate => {
            let result = simulate(&config)?;
            for note in &result.notes {
                eprintln!("note: {note}");
            }
            let text = match config.output.format {
                OutputFormat::Csv => output::result_to_csv(&result)?,
                OutputFormat::Json => output::result_to_json(&result)? + "\n",
            };
            emit(&text, path)
        }
        Command::Sweep => {
            let spec = config.sweep_spec()?;
            let records = match cli.threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Failure::Config(format!("threads: {e}")))?
                    .install(|| run_sweep(&spec))?,
                None => run_sweep(&spec)?,
            };
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} grid points failed", records.len());
            }
            let text = match config.output.format {
                OutputFormat::Csv => output::records_to_csv(&records)?,
                OutputFormat::Json => output::records_to_json(&records)? + "\n",
            };
            emit(&text, path)
        }
        Command::Verify => {
            let report = verify(&config)?;
            print!("{}", report.table());
            if let Some(p) = path {
                let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Numerical(e.to_string()))?;
                emit(&(json + "\n"), Some(p))?;
            }
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFICATION)
        }
    }
}
