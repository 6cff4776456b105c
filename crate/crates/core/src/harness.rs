//! Monte Carlo risk estimation over sample-size sweeps and log-log rate
//! regression.
//!
//! Replicates run on the ambient rayon pool. Each replicate draws from its
//! own keyed stream and results are reduced in replicate order, so output
//! does not depend on the number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::instances::{make_instance, InstanceKind, InstanceSpec};
use crate::model::{cond_tv, ConditionalDensity, InputDistribution, RiskSample};
use crate::sampling::{disclose, RngSeed, Sampler};

pub const DEFAULT_REPEATS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√repeats`.
    pub stderr: f64,
    pub repeats: u64,
}

impl RiskEstimate {
    pub fn from_samples(samples: &[RiskSample]) -> Result<Self> {
        let repeats = samples.len();
        if repeats < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 replicates, got {repeats}"
            )));
        }
        let k = repeats as f64;
        let mean = samples.iter().map(|r| r.value()).sum::<f64>() / k;
        let var = samples
            .iter()
            .map(|r| (r.value() - mean).powi(2))
            .sum::<f64>()
            / (k - 1.0);
        Ok(Self {
            mean,
            stderr: (var / k).sqrt(),
            repeats: repeats as u64,
        })
    }
}

/// One realized risk: draw, disclose, fit, score.
pub fn realized_risk(
    sampler: &Sampler,
    rho: &InputDistribution,
    pi_star: &ConditionalDensity,
    est: EstimatorKind,
    n: u64,
    seed: RngSeed,
) -> Result<RiskSample> {
    let d = sampler.dataset(n, &mut seed.rng())?;
    let side = disclose(est.required_level(), &d, pi_star)?;
    let student = est.fit(&d, &side)?;
    RiskSample::new(cond_tv(&student, pi_star, rho)?)
}

/// Monte Carlo estimate of `E cond_tv(π̂, π*, ρ)` from `repeats` datasets.
///
/// Each estimator is fed exactly the side-information its protocol
/// requires. Replicate `i` uses `seed.estimator(est.id()).n(n).replicate(i)`.
pub fn estimate_risk(
    rho: &InputDistribution,
    pi_star: &ConditionalDensity,
    est: EstimatorKind,
    n: u64,
    repeats: u64,
    seed: RngSeed,
) -> Result<RiskEstimate> {
    if repeats < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replicates, got {repeats}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let sampler = Sampler::new(rho, pi_star)?;
    let base = seed.estimator(est.id()).n(n);
    let samples = (0..repeats)
        .into_par_iter()
        .map(|i| realized_risk(&sampler, rho, pi_star, est, n, base.replicate(i)))
        .collect::<Result<Vec<_>>>()?;
    RiskEstimate::from_samples(&samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub instance: InstanceKind,
    pub estimator: EstimatorKind,
    pub inputs: usize,
    pub labels: usize,
    pub n: u64,
    pub estimate: RiskEstimate,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RiskTable {
    rows: Vec<RiskRow>,
}

impl RiskTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row; (instance, estimator, n) must be new to the table.
    pub fn push(&mut self, row: RiskRow) -> Result<()> {
        if self
            .rows
            .iter()
            .any(|r| r.instance == row.instance && r.estimator == row.estimator && r.n == row.n)
        {
            return Err(Error::InvalidArgument(format!(
                "duplicate row for instance {}, estimator {}, n = {}",
                row.instance, row.estimator, row.n
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[RiskRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (n, mean risk) points of one series, in table order.
    pub fn series(&self, instance: InstanceKind, estimator: EstimatorKind) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.instance == instance && r.estimator == estimator)
            .map(|r| (r.n, r.estimate.mean))
            .collect()
    }
}

/// Risk of every estimator at every n on one instance family.
///
/// Instance 0 is built once; the others are rebuilt for each n since their
/// teacher (and for Instance 3, ρ) is tuned to the sample size.
pub fn sweep(
    kind: InstanceKind,
    inputs: usize,
    labels: usize,
    n_list: &[u64],
    estimators: &[EstimatorKind],
    repeats: u64,
    master: u64,
) -> Result<RiskTable> {
    let spec_at = |n: u64| InstanceSpec::new(kind, inputs, labels, Some(n));
    for &n in n_list {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        spec_at(n).validate()?;
    }
    let fixed = if kind.depends_on_n() {
        None
    } else {
        Some(make_instance(&InstanceSpec::new(
            kind, inputs, labels, None,
        ))?)
    };
    let seed = RngSeed::new(master).instance(kind.id());
    let mut table = RiskTable::new();
    for &est in estimators {
        for &n in n_list {
            let built;
            let (rho, pi_star) = match &fixed {
                Some(instance) => instance,
                None => {
                    built = make_instance(&spec_at(n))?;
                    &built
                }
            };
            let estimate = estimate_risk(rho, pi_star, est, n, repeats, seed)?;
            log::debug!(
                "instance {kind} {est} n={n}: {:.6e} ± {:.2e}",
                estimate.mean,
                estimate.stderr
            );
            table.push(RiskRow {
                instance: kind,
                estimator: est,
                inputs,
                labels,
                n,
                estimate,
                seed: master,
            })?;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used in the fit.
    pub points: usize,
    /// Points discarded because their risk was not positive.
    pub dropped: usize,
}

/// Ordinary least squares of `log risk` on `log n`; the slope estimates the
/// rate exponent.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RegressionResult> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, risk)| *n > 0.0 && *risk > 0.0 && risk.is_finite())
        .map(|(n, risk)| (n.ln(), risk.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if dropped > 0 {
        log::warn!("fit_rate: dropped {dropped} point(s) with non-positive risk");
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            dropped,
        });
    }
    let k = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least two distinct sample sizes".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        points: usable.len(),
        dropped,
    })
}
