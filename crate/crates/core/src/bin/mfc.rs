use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mfc_core::harness::{compare_scenarios, run_scenario, simulate_first_order_loop, write_demo_csv, DemoSpec, Scenario};
use mfc_core::{EstimatorKind, Error, Result};

#[derive(Parser)]
#[command(name = "mfc", version, about = "Model-free greenhouse control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write timeseries.csv, pwm.csv and metrics.json
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's estimator
        #[arg(long, value_enum)]
        estimator: Option<EstimatorKind>,
    },
    /// Run two scenarios under the same weather and print a comparison
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write the comparison JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the first-order estimator demo and print its CSV
    EstimateDemo {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            estimator,
        } => {
            let mut scenario = Scenario::load(&scenario)?;
            if let Some(kind) = estimator {
                scenario.estimator = kind;
            }
            let output = run_scenario(&scenario)?;
            output.write(&out)?;
            println!("{}", to_json(&output.metrics.temperature)?);
            eprintln!("wrote {}", out.display());
        }
        Command::Compare { a, b, out } => {
            let (a, b) = (Scenario::load(&a)?, Scenario::load(&b)?);
            let (comparison, _, _) = compare_scenarios(&a, &b)?;
            let json = to_json(&comparison)?;
            if let Some(path) = out {
                fs::write(&path, format!("{json}\n")).map_err(|e| Error::Io { path, source: e })?;
            }
            println!("{json}");
        }
        Command::EstimateDemo { spec, out } => {
            let samples = simulate_first_order_loop(&DemoSpec::load(&spec)?)?;
            match out {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| Error::Io { path, source: e })?;
                    write_demo_csv(&samples, file)?;
                }
                None => write_demo_csv(&samples, io::stdout().lock())?,
            }
        }
    }
    io::stdout().flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
