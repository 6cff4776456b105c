//! Data-generating distributions used by the experiments.
//!
//! Labels are written 1-based in the constructions below and stored
//! 0-based, so label `k` lives at index `k − 1`.
//!
//! * Instance 0: ρ uniform; `π*(·|s) = ½ Uniform(A) + ½ Dirac(s mod A + 1)`.
//!   Fixed in n.
//! * Instance 1: ρ uniform; with `Δ = ¼ √(SA/n)`, label `2j − 1` has mass
//!   `(1 + Δ)/A` and label `2j` has `(1 − Δ)/A`. Odd A: label A gets zero
//!   mass and the construction runs on A − 1 labels.
//! * Instance 2: ρ uniform; label `2j − 1` has mass `S/(n + 1)`, label `2j`
//!   has zero, and label A absorbs `1 − (S/2)(A − 1)/(n + 1)`. Even A: label
//!   A gets zero mass and the construction runs on A − 1 labels, so label
//!   A − 1 becomes the sink.
//! * Instance 3: teacher of Instance 2; `ρ(s) = 1/(n + 1)` for every input
//!   but the last, which takes the remainder.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ConditionalDensity, InputDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstanceKind {
    I0,
    I1,
    I2,
    I3,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] = [Self::I0, Self::I1, Self::I2, Self::I3];

    pub fn id(self) -> u64 {
        match self {
            Self::I0 => 0,
            Self::I1 => 1,
            Self::I2 => 2,
            Self::I3 => 3,
        }
    }

    /// Whether the distribution is rebuilt for every sample size.
    pub fn depends_on_n(self) -> bool {
        self != Self::I0
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown instance '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub inputs: usize,
    pub labels: usize,
    /// Sample size the instance is tuned to; ignored by Instance 0.
    pub n: Option<u64>,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, inputs: usize, labels: usize, n: Option<u64>) -> Self {
        Self {
            kind,
            inputs,
            labels,
            n,
        }
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidInstance {
            kind: format!("Instance {}", self.kind),
            reason,
        }
    }

    /// Checks alphabet sizes and the burn-in condition of the instance.
    pub fn validate(&self) -> Result<()> {
        let (s, a) = (self.inputs as u128, self.labels as u128);
        let kind = self.kind;
        if s < 1 {
            return Err(self.invalid(format!("Instance {kind} needs S ≥ 1")));
        }
        if a < 2 {
            return Err(self.invalid(format!("Instance {kind} needs A ≥ 2")));
        }
        if kind == InstanceKind::I0 {
            return Ok(());
        }
        let n = match self.n {
            Some(n) if n >= 1 => n as u128,
            _ => return Err(self.invalid(format!("Instance {kind} needs a sample size n ≥ 1"))),
        };
        match kind {
            InstanceKind::I0 => {}
            InstanceKind::I1 => {
                if 4 * n < s * a {
                    return Err(self.invalid(format!(
                        "n = {n} below burn-in for Instance 1 (need n ≥ S·A/4 = {})",
                        (s * a).div_ceil(4)
                    )));
                }
            }
            InstanceKind::I2 | InstanceKind::I3 => {
                if 2 * (n + 1) < s * (a - 1) {
                    return Err(self.invalid(format!(
                        "n = {n} below burn-in for Instance {kind} (need n ≥ S(A−1)/2 − 1 = {})",
                        (s * (a - 1)).div_ceil(2) - 1
                    )));
                }
                if kind == InstanceKind::I3 && n < s {
                    return Err(self.invalid(format!(
                        "n = {n} below burn-in for Instance 3 (need n > S − 1 = {})",
                        s - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds (ρ, π*) for a legal spec.
pub fn make_instance(spec: &InstanceSpec) -> Result<(InputDistribution, ConditionalDensity)> {
    spec.validate()?;
    let (inputs, labels) = (spec.inputs, spec.labels);
    let n = spec.n.unwrap_or(0);
    match spec.kind {
        InstanceKind::I0 => {
            let rows = (0..inputs)
                .map(|s| {
                    let mut row = vec![0.5 / labels as f64; labels];
                    row[s % labels] += 0.5;
                    row
                })
                .collect();
            Ok((
                InputDistribution::uniform(inputs)?,
                ConditionalDensity::new(rows)?,
            ))
        }
        InstanceKind::I1 => {
            let row = perturbed_uniform_row(inputs, labels, n);
            let delta = hypercube_delta(inputs, row_support(labels, true), n);
            if delta > 1.0 {
                return Err(spec.invalid(format!("perturbation {delta} exceeds 1")));
            }
            Ok((
                InputDistribution::uniform(inputs)?,
                ConditionalDensity::new(vec![row; inputs])?,
            ))
        }
        InstanceKind::I2 => Ok((
            InputDistribution::uniform(inputs)?,
            ConditionalDensity::new(vec![vanishing_row(inputs, labels, n); inputs])?,
        )),
        InstanceKind::I3 => {
            let rare = 1.0 / (n as f64 + 1.0);
            let mut rho = vec![rare; inputs];
            rho[inputs - 1] = 1.0 - (inputs - 1) as f64 * rare;
            Ok((
                InputDistribution::new(rho)?,
                ConditionalDensity::new(vec![vanishing_row(inputs, labels, n); inputs])?,
            ))
        }
    }
}

/// Number of labels carrying the construction; the rest get zero mass.
fn row_support(labels: usize, want_even: bool) -> usize {
    if labels.is_multiple_of(2) == want_even {
        labels
    } else {
        labels - 1
    }
}

fn hypercube_delta(inputs: usize, support: usize, n: u64) -> f64 {
    0.25 * ((inputs * support) as f64 / n as f64).sqrt()
}

fn perturbed_uniform_row(inputs: usize, labels: usize, n: u64) -> Vec<f64> {
    let support = row_support(labels, true);
    let delta = hypercube_delta(inputs, support, n);
    let mut row = vec![0.0; labels];
    for j in 0..support / 2 {
        row[2 * j] = (1.0 + delta) / support as f64;
        row[2 * j + 1] = (1.0 - delta) / support as f64;
    }
    row
}

fn vanishing_row(inputs: usize, labels: usize, n: u64) -> Vec<f64> {
    let support = row_support(labels, false);
    let rare = inputs as f64 / (n as f64 + 1.0);
    let mut row = vec![0.0; labels];
    for j in 0..(support - 1) / 2 {
        row[2 * j] = rare;
    }
    row[support - 1] = 1.0 - 0.5 * inputs as f64 * (support - 1) as f64 / (n as f64 + 1.0);
    row
}
