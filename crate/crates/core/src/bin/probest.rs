use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use probest::harness::{
    chain_report, chain_sweep, design_report, run_compare, run_hypothesis_test, run_oracle_suite,
    write_compare_csv, ChainSpec, ExperimentConfig, ModelSpec, SWEEP_P1, SWEEP_P2,
};
use probest::oracle::EnumerationBudget;
use probest::{DiscreteDistribution, Error, EstimatorId, Event, OutcomeId};

#[derive(Parser)]
#[command(
    name = "probest",
    version,
    about = "Probability-informed estimators and epidemic experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical vs exact estimator moments over seeded replications (CSV).
    Compare(RunArgs),
    /// Exact chain quantities and the (p1, p2) region where v1 < v0 (JSON).
    Chain(RunArgs),
    /// Test for an ongoing outbreak given all-negative sentinel tests (JSON).
    Hyptest(RunArgs),
    /// Exhaustive-enumeration verification suite (JSON); exits 2 on failure.
    Oracle(OracleArgs),
    /// Optimal importance-sampling design for an event (JSON).
    Design(DesignArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults to the L=10, T=20 chain.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u64>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long = "L")]
    length: Option<u32>,
    #[arg(long = "T")]
    horizon: Option<u32>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    level: Option<f64>,
    /// Estimators, comma separated (e.g. pi0,pi1,pi2).
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<EstimatorId>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest number of sample tuples enumerated per cell.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    n: u64,
    /// Target weights of outcomes 0, 1, 2, ...
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.3,0.2,0.15,0.1,0.1,0.08,0.07"
    )]
    weights: Vec<f64>,
    /// Indices of the outcomes in the event.
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,6")]
    members: Vec<u64>,
    /// Also search the simplex on this grid step.
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

/// Failures mapped to exit codes.
enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default_chain(),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(reps) = self.reps {
            c.reps = reps;
        }
        if !self.n.is_empty() {
            c.n_grid = self.n.clone();
        }
        if let Some(level) = self.level {
            c.level = level;
        }
        if !self.estimators.is_empty() {
            c.estimators = self.estimators.clone();
        }
        if let Some(out) = &self.out {
            c.output = Some(out.clone());
        }
        let chain_flags = self.length.is_some()
            || self.horizon.is_some()
            || self.p1.is_some()
            || self.p2.is_some();
        match &mut c.model {
            ModelSpec::Chain(spec) => {
                let ChainSpec {
                    length,
                    horizon,
                    p1,
                    p2,
                    ..
                } = spec;
                *length = self.length.unwrap_or(*length);
                *horizon = self.horizon.unwrap_or(*horizon);
                *p1 = self.p1.unwrap_or(*p1);
                *p2 = self.p2.unwrap_or(*p2);
            }
            ModelSpec::Network(_) if chain_flags => {
                return Err(Failure::Usage(
                    "--L, --T, --p1 and --p2 apply to chain models only".into(),
                ))
            }
            ModelSpec::Network(_) => {}
        }
        c.validate()?;
        Ok(c)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&PathBuf>) -> Result<(), Failure> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn compare(args: &RunArgs) -> Result<(), Failure> {
    let c = args.config()?;
    let rows = run_compare(&c)?;
    for r in rows.iter().filter(|r| r.within_5se == Some(false)) {
        eprintln!(
            "warning: {} at n={} empirical variance is more than 5 SE from the exact value",
            r.estimator, r.n
        );
    }
    let mut w = output(c.output.as_ref())?;
    write_compare_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn chain(args: &RunArgs) -> Result<(), Failure> {
    let c = args.config()?;
    let ModelSpec::Chain(spec) = &c.model else {
        return Err(Failure::Usage("chain needs a chain model".into()));
    };
    let params = spec.params()?;
    let n = c.n_grid[0];
    let mut report = chain_report(&params, n);
    report.sweep = chain_sweep(params.length, params.horizon, n, &SWEEP_P1, &SWEEP_P2)?;
    write_json(&report, c.output.as_ref())
}

fn hyptest(args: &RunArgs) -> Result<(), Failure> {
    let c = args.config()?;
    let resolved = c.resolve_model()?;
    // without a flag or config file the inclusion-weighted estimator is used
    let estimator = if args.estimators.is_empty() && args.config.is_none() {
        EstimatorId::Pi1
    } else {
        c.estimators[0]
    };
    let event_size = match (c.event_size, estimator) {
        (Some(m), _) => Some(m),
        (None, EstimatorId::Pi2) => resolved
            .detection_classes(c.enumeration_budget)?
            .map(|(_, miss)| miss.iter().map(|k| k.count).sum()),
        _ => None,
    };
    let result = run_hypothesis_test(
        &resolved,
        c.level,
        c.n_grid[0],
        estimator,
        c.seed,
        c.jackknife,
        event_size,
    )?;
    write_json(&result, c.output.as_ref())
}

fn oracle(args: &OracleArgs) -> Result<(), Failure> {
    let report = run_oracle_suite(&EnumerationBudget::new(args.budget)?)?;
    write_json(&report, args.out.as_ref())?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} of {} verified cells failed",
            report.failed,
            report.passed + report.failed
        )))
    }
}

fn design(args: &DesignArgs) -> Result<(), Failure> {
    let dist = DiscreteDistribution::from_weights(&args.weights)?;
    let event = Event::new(args.members.iter().map(|&i| OutcomeId(i)));
    event.check_against(&dist)?;
    let budget = EnumerationBudget::new(args.budget)?;
    let report = design_report(&dist, &event, args.n, args.grid_step, &budget)?;
    write_json(&report, args.out.as_ref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Compare(a) => compare(a),
        Command::Chain(a) => chain(a),
        Command::Hyptest(a) => hyptest(a),
        Command::Oracle(a) => oracle(a),
        Command::Design(a) => design(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
