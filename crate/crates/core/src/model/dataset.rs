use std::fmt;

use crate::error::{Error, Result};
use crate::model::distribution::validated;

/// Multiset of (input, label) pairs kept as an occurrence-count table.
///
/// Every learner here depends on the sample only through these counts, so
/// the order in which pairs were drawn is not retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    inputs: usize,
    labels: usize,
    counts: Vec<u64>,
    n: u64,
}

impl Dataset {
    /// Builds a dataset from a row-major `inputs × labels` count table.
    pub fn from_counts(inputs: usize, labels: usize, counts: Vec<u64>) -> Result<Self> {
        if inputs == 0 || labels == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs nonempty alphabets".into(),
            ));
        }
        if counts.len() != inputs * labels {
            return Err(Error::DimensionMismatch {
                context: "count table",
                expected: inputs * labels,
                found: counts.len(),
            });
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            inputs,
            labels,
            counts,
            n,
        })
    }

    pub fn from_pairs(inputs: usize, labels: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut counts = vec![0u64; inputs * labels];
        for &(s, a) in pairs {
            if s >= inputs || a >= labels {
                return Err(Error::InvalidArgument(format!(
                    "pair ({s}, {a}) outside {inputs}×{labels}"
                )));
            }
            counts[s * labels + a] += 1;
        }
        Self::from_counts(inputs, labels, counts)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, input: usize, label: usize) -> u64 {
        self.counts[input * self.labels + label]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn counts_row(&self, input: usize) -> &[u64] {
        &self.counts[input * self.labels..(input + 1) * self.labels]
    }

    /// n(s, S(D)): how often `input` was sampled.
    pub fn visits(&self, input: usize) -> u64 {
        self.counts_row(input).iter().sum()
    }

    pub fn visit_counts(&self) -> Vec<u64> {
        (0..self.inputs).map(|s| self.visits(s)).collect()
    }

    pub fn is_visited(&self, input: usize) -> bool {
        self.counts_row(input).iter().any(|&c| c > 0)
    }

    /// Deduplicated (input, label) pairs with positive count.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let labels = self.labels;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, _)| (i / labels, i % labels))
    }
}

/// How much the teacher discloses beyond the sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DisclosureLevel {
    HardLabels,
    PartialSoftLabels,
    SoftLabels,
}

impl DisclosureLevel {
    pub fn name(self) -> &'static str {
        match self {
            Self::HardLabels => "hard labels",
            Self::PartialSoftLabels => "partial soft labels",
            Self::SoftLabels => "soft labels",
        }
    }
}

impl fmt::Display for DisclosureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Privileged side-information accompanying a [`Dataset`].
///
/// * `HardLabels`: nothing beyond the pairs.
/// * `PartialSoftLabels`: π*(a|s) for every sampled pair.
/// * `SoftLabels`: the full row π*(·|s) for every visited input.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferData {
    level: DisclosureLevel,
    inputs: usize,
    labels: usize,
    pub(crate) partial: Option<Vec<Option<f64>>>,
    pub(crate) full: Option<Vec<Option<Vec<f64>>>>,
}

impl TransferData {
    pub fn hard(dataset: &Dataset) -> Self {
        Self {
            level: DisclosureLevel::HardLabels,
            inputs: dataset.inputs(),
            labels: dataset.labels(),
            partial: None,
            full: None,
        }
    }

    /// Partial soft labels; `entries` must cover exactly the support of
    /// `dataset` with strictly positive probabilities.
    pub fn partial(
        dataset: &Dataset,
        entries: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let (inputs, labels) = (dataset.inputs(), dataset.labels());
        let mut table = vec![None; inputs * labels];
        for ((s, a), p) in entries {
            if s >= inputs || a >= labels {
                return Err(Error::InvalidArgument(format!(
                    "partial label ({s}, {a}) outside {inputs}×{labels}"
                )));
            }
            if dataset.count(s, a) == 0 {
                return Err(Error::InconsistentSideInformation {
                    input: s,
                    reason: format!("label {a} was never sampled"),
                });
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InconsistentSideInformation {
                    input: s,
                    reason: format!("teacher probability {p} of sampled label {a}"),
                });
            }
            table[s * labels + a] = Some(p);
        }
        if let Some((s, a)) = dataset
            .support()
            .find(|&(s, a)| table[s * labels + a].is_none())
        {
            return Err(Error::InconsistentSideInformation {
                input: s,
                reason: format!("missing teacher probability for sampled label {a}"),
            });
        }
        Ok(Self {
            level: DisclosureLevel::PartialSoftLabels,
            inputs,
            labels,
            partial: Some(table),
            full: None,
        })
    }

    /// Soft labels; `rows` must cover exactly the visited inputs of `dataset`.
    pub fn soft(
        dataset: &Dataset,
        rows: impl IntoIterator<Item = (usize, Vec<f64>)>,
    ) -> Result<Self> {
        let (inputs, labels) = (dataset.inputs(), dataset.labels());
        let mut full: Vec<Option<Vec<f64>>> = vec![None; inputs];
        for (s, row) in rows {
            if s >= inputs {
                return Err(Error::InvalidArgument(format!(
                    "soft label row {s} outside {inputs} inputs"
                )));
            }
            if !dataset.is_visited(s) {
                return Err(Error::InconsistentSideInformation {
                    input: s,
                    reason: "row given for an unvisited input".into(),
                });
            }
            if row.len() != labels {
                return Err(Error::DimensionMismatch {
                    context: "soft label row",
                    expected: labels,
                    found: row.len(),
                });
            }
            let row = validated(row, &format!("soft label row {s}"))?;
            if let Some(a) = (0..labels).find(|&a| dataset.count(s, a) > 0 && row[a] <= 0.0) {
                return Err(Error::InconsistentSideInformation {
                    input: s,
                    reason: format!("sampled label {a} has zero teacher probability"),
                });
            }
            full[s] = Some(row);
        }
        if let Some(s) = (0..inputs).find(|&s| dataset.is_visited(s) && full[s].is_none()) {
            return Err(Error::InconsistentSideInformation {
                input: s,
                reason: "missing teacher row for a visited input".into(),
            });
        }
        Ok(Self {
            level: DisclosureLevel::SoftLabels,
            inputs,
            labels,
            partial: None,
            full: Some(full),
        })
    }

    pub fn level(&self) -> DisclosureLevel {
        self.level
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    /// π*(a|s) for a sampled pair, available at partial or soft level.
    pub fn sampled_probability(&self, input: usize, label: usize) -> Option<f64> {
        match self.level {
            DisclosureLevel::HardLabels => None,
            DisclosureLevel::PartialSoftLabels => {
                self.partial.as_ref()?[input * self.labels + label]
            }
            DisclosureLevel::SoftLabels => {
                self.full.as_ref()?[input].as_ref().map(|row| row[label])
            }
        }
    }

    /// π*(·|s) for a visited input, available at soft level only.
    pub fn teacher_row(&self, input: usize) -> Option<&[f64]> {
        self.full.as_ref()?[input].as_deref()
    }

    /// Every disclosed (input, label, probability) triple in index order.
    pub fn partial_entries(&self) -> Vec<((usize, usize), f64)> {
        match &self.partial {
            Some(table) => table
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|p| ((i / self.labels, i % self.labels), p)))
                .collect(),
            None => Vec::new(),
        }
    }

    pub(crate) fn check_shape(&self, dataset: &Dataset) -> Result<()> {
        if self.inputs != dataset.inputs() {
            return Err(Error::DimensionMismatch {
                context: "side-information inputs",
                expected: dataset.inputs(),
                found: self.inputs,
            });
        }
        if self.labels != dataset.labels() {
            return Err(Error::DimensionMismatch {
                context: "side-information labels",
                expected: dataset.labels(),
                found: self.labels,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        Dataset::from_pairs(2, 3, &[(0, 1), (0, 1), (0, 2)]).unwrap()
    }

    #[test]
    fn counts_and_visits() {
        let d = small();
        assert_eq!(d.n(), 3);
        assert_eq!(d.counts_row(0), &[0, 2, 1]);
        assert_eq!(d.visit_counts(), vec![3, 0]);
        assert!(!d.is_visited(1));
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert_eq!(
            Dataset::from_counts(1, 2, vec![0, 0]),
            Err(Error::EmptyDataset)
        );
        assert!(Dataset::from_counts(1, 2, vec![1]).is_err());
        assert!(Dataset::from_pairs(1, 2, &[(0, 2)]).is_err());
    }

    #[test]
    fn partial_must_match_support() {
        let d = small();
        assert!(TransferData::partial(&d, [((0, 1), 0.5)]).is_err());
        assert!(TransferData::partial(&d, [((0, 1), 0.5), ((0, 2), 0.3), ((0, 0), 0.2)]).is_err());
        assert!(TransferData::partial(&d, [((0, 1), 0.5), ((0, 2), 0.0)]).is_err());
        let r = TransferData::partial(&d, [((0, 1), 0.5), ((0, 2), 0.3)]).unwrap();
        assert_eq!(r.level(), DisclosureLevel::PartialSoftLabels);
        assert_eq!(r.sampled_probability(0, 2), Some(0.3));
        assert_eq!(r.sampled_probability(0, 0), None);
        assert_eq!(r.teacher_row(0), None);
    }

    #[test]
    fn soft_must_match_visits() {
        let d = small();
        assert!(TransferData::soft(&d, []).is_err());
        assert!(
            TransferData::soft(&d, [(0, vec![0.5, 0.3, 0.2]), (1, vec![1.0, 0.0, 0.0])]).is_err()
        );
        assert!(TransferData::soft(&d, [(0, vec![0.5, 0.5, 0.0])]).is_err());
        let q = TransferData::soft(&d, [(0, vec![0.5, 0.3, 0.2])]).unwrap();
        assert_eq!(q.teacher_row(0), Some(&[0.5, 0.3, 0.2][..]));
        assert_eq!(q.teacher_row(1), None);
        assert_eq!(q.sampled_probability(0, 1), Some(0.3));
    }
}
