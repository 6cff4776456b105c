use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest deviation of a sum from one that constructors silently repair.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Validates `values` as a probability vector, dividing out float drift of
/// at most [`NORMALIZATION_TOLERANCE`].
pub(crate) fn validated(values: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::NotProbability(format!("{what} is empty")));
    }
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::NotProbability(format!("{what} entry {i} is {v}")));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotProbability(format!("{what} sums to {sum}")));
    }
    // Kept as given: rescaling would perturb exact ratios such as c/n.
    Ok(values)
}

fn write_row(out: &mut String, row: &[f64], decimals: usize) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:.decimals$}");
    }
    out.push('\n');
}

/// Distribution ρ over the input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(Self {
            probs: validated(probs, "input distribution")?,
        })
    }

    pub fn uniform(inputs: usize) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::InvalidArgument("need at least one input".into()));
        }
        Ok(Self {
            probs: vec![1.0 / inputs as f64; inputs],
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Single-line dump with `decimals` places per entry.
    pub fn to_table(&self, decimals: usize) -> String {
        let mut out = String::new();
        write_row(&mut out, &self.probs, decimals);
        out
    }
}

/// Row-stochastic table π(a|s) with `inputs` rows and `labels` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensity {
    inputs: usize,
    labels: usize,
    table: Vec<f64>,
}

impl ConditionalDensity {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::InvalidArgument(
                "conditional density needs at least one row".into(),
            ));
        }
        let labels = rows[0].len();
        let mut table = Vec::with_capacity(inputs * labels);
        for (s, row) in rows.into_iter().enumerate() {
            if row.len() != labels {
                return Err(Error::DimensionMismatch {
                    context: "conditional density row",
                    expected: labels,
                    found: row.len(),
                });
            }
            table.extend(validated(row, &format!("row {s}"))?);
        }
        Ok(Self {
            inputs,
            labels,
            table,
        })
    }

    pub fn uniform(inputs: usize, labels: usize) -> Result<Self> {
        if inputs == 0 || labels == 0 {
            return Err(Error::InvalidArgument(
                "conditional density needs nonempty alphabets".into(),
            ));
        }
        Ok(Self {
            inputs,
            labels,
            table: vec![1.0 / labels as f64; inputs * labels],
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.table[input * self.labels..(input + 1) * self.labels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks_exact(self.labels)
    }

    pub fn prob(&self, input: usize, label: usize) -> f64 {
        self.table[input * self.labels + label]
    }

    /// One line per input, `decimals` places per entry.
    pub fn to_table(&self, decimals: usize) -> String {
        let mut out = String::new();
        for row in self.rows() {
            write_row(&mut out, row, decimals);
        }
        out
    }
}

/// One realized conditional-TV risk.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskSample(f64);

impl RiskSample {
    pub fn new(value: f64) -> Result<Self> {
        // Float summation of ρ-weighted TVs may overshoot 1 by an ulp or two.
        if !(0.0..=1.0 + 1e-12).contains(&value) {
            return Err(Error::InvalidArgument(format!(
                "risk {value} outside [0, 1]"
            )));
        }
        Ok(Self(value.min(1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerates_small_drift_verbatim() {
        let rho = InputDistribution::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert_eq!(rho.probs(), &[0.5, 0.5 + 5e-10]);
    }

    #[test]
    fn rejects_real_errors() {
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(InputDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(InputDistribution::new(vec![]).is_err());
        assert!(ConditionalDensity::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(ConditionalDensity::new(vec![vec![f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn exact_rows_are_untouched() {
        let row = vec![0.5, 0.3, 0.2];
        let pi = ConditionalDensity::new(vec![row.clone()]).unwrap();
        assert_eq!(pi.row(0), row.as_slice());
    }

    #[test]
    fn table_dump() {
        let pi = ConditionalDensity::new(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        assert_eq!(pi.to_table(6), "0.750000 0.250000\n0.250000 0.750000\n");
        let rho = InputDistribution::new(vec![0.1, 0.1, 0.8]).unwrap();
        assert_eq!(rho.to_table(6), "0.100000 0.100000 0.800000\n");
    }

    #[test]
    fn risk_sample_range() {
        assert!(RiskSample::new(-0.1).is_err());
        assert!(RiskSample::new(1.5).is_err());
        assert_eq!(RiskSample::new(1.0 + 1e-15).unwrap().value(), 1.0);
    }
}
