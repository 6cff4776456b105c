use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use transferlab::checks::{closed_form_suite, exact_risk_suite, Check};
use transferlab::harness::{fit_rate, sweep, RiskRow};
use transferlab::{make_instance, EstimatorKind, InstanceKind, InstanceSpec};

use crate::table::{format_float, read_rows, write_rows};

/// Default number of random problems in the closed-form suite.
pub const VERIFY_PROBLEMS: usize = 100;
/// Default Monte Carlo replicates in the exact-risk suite.
pub const VERIFY_REPLICATES: u64 = 200_000;

/// Runs `f` on a pool of `workers` threads (all cores when `None` or 0).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub instance: InstanceKind,
    pub inputs: usize,
    pub labels: usize,
    pub n_list: Vec<u64>,
    pub estimators: Vec<EstimatorKind>,
    pub repeats: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

impl SimulateConfig {
    /// Rejects the configuration before any sampling happens.
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            bail!("--n needs at least one sample size");
        }
        if self.estimators.is_empty() {
            bail!("--estimators needs at least one estimator");
        }
        if self.repeats < 2 {
            bail!("--repeats must be at least 2");
        }
        let mut seen = self.n_list.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            bail!("--n lists a sample size twice");
        }
        let mut ests = self.estimators.clone();
        ests.sort_unstable();
        if ests.windows(2).any(|w| w[0] == w[1]) {
            bail!("--estimators lists an estimator twice");
        }
        for &n in &self.n_list {
            if n == 0 {
                bail!("sample sizes must be positive");
            }
            InstanceSpec::new(self.instance, self.inputs, self.labels, Some(n)).validate()?;
        }
        Ok(())
    }
}

pub fn simulate(config: &SimulateConfig) -> Result<usize> {
    config.validate()?;
    let table = with_workers(config.workers, || {
        sweep(
            config.instance,
            config.inputs,
            config.labels,
            &config.n_list,
            &config.estimators,
            config.repeats,
            config.seed,
        )
    })??;
    let file =
        File::create(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    write_rows(BufWriter::new(file), table.rows())?;
    Ok(table.len())
}

#[derive(Debug, Clone, Default)]
pub struct RatesFilter {
    pub estimators: Vec<EstimatorKind>,
    pub instance: Option<InstanceKind>,
}

type SeriesKey = (InstanceKind, EstimatorKind, usize, usize);

/// Rate fits for every (instance, estimator, S, A) series that passes the
/// filter, as `key: value` records separated by blank lines.
pub fn rates_report(rows: &[RiskRow], filter: &RatesFilter) -> Result<String> {
    let mut groups: BTreeMap<SeriesKey, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        if !filter.estimators.is_empty() && !filter.estimators.contains(&row.estimator) {
            continue;
        }
        if filter.instance.is_some_and(|k| k != row.instance) {
            continue;
        }
        groups
            .entry((row.instance, row.estimator, row.inputs, row.labels))
            .or_default()
            .push((row.n as f64, row.estimate.mean));
    }
    if groups.is_empty() {
        bail!(transferlab::Error::InsufficientData {
            usable: 0,
            dropped: 0
        });
    }
    let mut report = String::new();
    for ((instance, estimator, inputs, labels), points) in groups {
        let fit = fit_rate(&points)
            .with_context(|| format!("instance {instance}, estimator {estimator}"))?;
        if !report.is_empty() {
            report.push('\n');
        }
        report.push_str(&format!(
            "instance: {instance}\nestimator: {estimator}\nS: {inputs}\nA: {labels}\n\
             points: {}\ndropped: {}\nslope: {}\nintercept: {}\nr_squared: {}\n",
            fit.points,
            fit.dropped,
            format_float(fit.slope),
            format_float(fit.intercept),
            format_float(fit.r_squared),
        ));
    }
    Ok(report)
}

pub fn rates(input: &PathBuf, filter: &RatesFilter, out: Option<&PathBuf>) -> Result<String> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let rows =
        read_rows(BufReader::new(file)).with_context(|| format!("parsing {}", input.display()))?;
    let report = rates_report(&rows, filter)?;
    if let Some(path) = out {
        std::fs::write(path, &report).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

pub fn instance_dump(spec: &InstanceSpec) -> Result<String> {
    let (rho, pi_star) = make_instance(spec)?;
    Ok(format!(
        "rho\n{}pi_star\n{}",
        rho.to_table(6),
        pi_star.to_table(6)
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    ClosedForms,
    ExactRisk,
    All,
}

pub fn verify(
    scope: Scope,
    step: f64,
    seed: u64,
    replicates: u64,
    workers: Option<usize>,
) -> Result<Vec<Check>> {
    with_workers(workers, || -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        if matches!(scope, Scope::ClosedForms | Scope::All) {
            checks.extend(closed_form_suite(VERIFY_PROBLEMS, step, seed)?);
        }
        if matches!(scope, Scope::ExactRisk | Scope::All) {
            checks.extend(exact_risk_suite(replicates, seed)?);
        }
        Ok(checks)
    })?
}

pub fn print_checks<W: Write>(mut out: W, checks: &[Check]) -> Result<bool> {
    for check in checks {
        writeln!(out, "{check}")?;
    }
    Ok(checks.iter().all(Check::passed))
}
