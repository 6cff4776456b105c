use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use transferlab::{EstimatorKind, InstanceKind, InstanceSpec};
use transferlab_cli::commands::{self, RatesFilter, Scope, SimulateConfig, VERIFY_REPLICATES};

#[derive(Parser)]
#[command(
    name = "transferlab",
    version,
    about = "Knowledge-transfer risk simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo risk of each estimator over a list of sample sizes.
    Simulate {
        #[arg(long)]
        instance: InstanceKind,
        #[arg(long = "S")]
        inputs: usize,
        #[arg(long = "A")]
        labels: usize,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "mle,empce,empsel,fullkl")]
        estimators: Vec<EstimatorKind>,
        #[arg(long, default_value_t = transferlab::harness::DEFAULT_REPEATS)]
        repeats: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Log-log rate fits from a simulation CSV.
    Rates {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        estimators: Vec<EstimatorKind>,
        #[arg(long)]
        instance: Option<InstanceKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print ρ and π* of an instance.
    InstanceDump {
        #[arg(long)]
        instance: InstanceKind,
        #[arg(long = "S")]
        inputs: usize,
        #[arg(long = "A")]
        labels: usize,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Check the closed forms and the harness against brute-force oracles.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        scope: ScopeArg,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = VERIFY_REPLICATES)]
        replicates: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    ClosedForms,
    ExactRisk,
    All,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::ClosedForms => Scope::ClosedForms,
            ScopeArg::ExactRisk => Scope::ExactRisk,
            ScopeArg::All => Scope::All,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let stdout = std::io::stdout();
    match cli.command {
        Command::Simulate {
            instance,
            inputs,
            labels,
            n,
            estimators,
            repeats,
            seed,
            out,
            workers,
        } => {
            let config = SimulateConfig {
                instance,
                inputs,
                labels,
                n_list: n,
                estimators,
                repeats,
                seed,
                out,
                workers,
            };
            let rows = commands::simulate(&config)?;
            eprintln!("wrote {rows} rows to {}", config.out.display());
        }
        Command::Rates {
            input,
            estimators,
            instance,
            out,
        } => {
            let filter = RatesFilter {
                estimators,
                instance,
            };
            let report = commands::rates(&input, &filter, out.as_ref())?;
            if out.is_none() {
                stdout.lock().write_all(report.as_bytes())?;
            }
        }
        Command::InstanceDump {
            instance,
            inputs,
            labels,
            n,
        } => {
            let text = commands::instance_dump(&InstanceSpec::new(instance, inputs, labels, n))?;
            stdout.lock().write_all(text.as_bytes())?;
        }
        Command::Verify {
            scope,
            step,
            seed,
            replicates,
            workers,
        } => {
            let checks = commands::verify(scope.into(), step, seed, replicates, workers)?;
            return commands::print_checks(stdout.lock(), &checks);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
