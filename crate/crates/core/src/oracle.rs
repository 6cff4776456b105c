//! Brute-force references for the closed forms: exact empirical losses,
//! exhaustive search over a simplex grid, and exact expected risk by
//! enumerating every ordered sample.
//!
//! All three empirical losses are sums of per-input terms, so the grid
//! search minimizes each row independently.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::model::{
    cond_tv, ConditionalDensity, Dataset, DisclosureLevel, InputDistribution, TransferData,
};
use crate::sampling::disclose;

/// Largest label alphabet the grid search accepts.
pub const GRID_MAX_LABELS: usize = 4;
/// Finest grid step the grid search accepts.
pub const GRID_MIN_STEP: f64 = 0.01;
/// Largest number of ordered samples `(S·A)^n` the enumeration accepts.
pub const ENUMERATION_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `−Σᵢ log π(aᵢ|sᵢ)`
    HardCe,
    /// `−Σᵢ π*(aᵢ|sᵢ) log π(aᵢ|sᵢ)`
    PartialCe,
    /// `Σᵢ ½ (log π(aᵢ|sᵢ) − log π*(aᵢ|sᵢ))²`
    PartialSel,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [Self::HardCe, Self::PartialCe, Self::PartialSel];

    /// The learner whose closed form minimizes this loss.
    pub fn minimizer(self) -> EstimatorKind {
        match self {
            Self::HardCe => EstimatorKind::Mle,
            Self::PartialCe => EstimatorKind::EmpCe,
            Self::PartialSel => EstimatorKind::EmpSel,
        }
    }

    fn needs_teacher(self) -> bool {
        self != Self::HardCe
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HardCe => "hard-ce",
            Self::PartialCe => "partial-ce",
            Self::PartialSel => "partial-sel",
        })
    }
}

/// Sampled-label teacher probabilities of row `s`, or `None` per label.
fn teacher_probs(
    kind: LossKind,
    d: &Dataset,
    r: Option<&TransferData>,
    s: usize,
) -> Result<Vec<Option<f64>>> {
    if !kind.needs_teacher() {
        return Ok(vec![None; d.labels()]);
    }
    let r = match r {
        Some(r) if r.level() >= DisclosureLevel::PartialSoftLabels => r,
        other => {
            return Err(Error::Protocol {
                estimator: "loss oracle",
                required: DisclosureLevel::PartialSoftLabels.name(),
                given: other.map_or("nothing", |r| r.level().name()),
            })
        }
    };
    r.check_shape(d)?;
    d.counts_row(s)
        .iter()
        .enumerate()
        .map(|(a, &c)| {
            if c == 0 {
                return Ok(None);
            }
            r.sampled_probability(s, a).map(Some).ok_or_else(|| {
                Error::InconsistentSideInformation {
                    input: s,
                    reason: format!("no teacher probability for sampled label {a}"),
                }
            })
        })
        .collect()
}

/// Loss of one row; `+∞` when the row puts zero mass on a sampled label.
fn row_loss(kind: LossKind, row: &[f64], counts: &[u64], teacher: &[Option<f64>]) -> f64 {
    let mut total = 0.0;
    for (a, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let p = row[a];
        if p <= 0.0 {
            return f64::INFINITY;
        }
        let c = c as f64;
        total += match kind {
            LossKind::HardCe => -c * p.ln(),
            LossKind::PartialCe => -c * teacher[a].unwrap_or(0.0) * p.ln(),
            LossKind::PartialSel => {
                let gap = p.ln() - teacher[a].unwrap_or(1.0).ln();
                0.5 * c * gap * gap
            }
        };
    }
    total
}

/// Empirical loss of `pi` on `d`, counting each pair with its multiplicity.
///
/// Returns `+∞` (not an error) when `pi` has zero mass on a sampled pair.
pub fn loss_eval(
    kind: LossKind,
    pi: &ConditionalDensity,
    d: &Dataset,
    r: Option<&TransferData>,
) -> Result<f64> {
    if pi.inputs() != d.inputs() || pi.labels() != d.labels() {
        return Err(Error::DimensionMismatch {
            context: "loss_eval",
            expected: d.inputs() * d.labels(),
            found: pi.inputs() * pi.labels(),
        });
    }
    let mut total = 0.0;
    for s in 0..d.inputs() {
        let teacher = teacher_probs(kind, d, r, s)?;
        total += row_loss(kind, pi.row(s), d.counts_row(s), &teacher);
    }
    Ok(total)
}

/// Resolution of a grid step: the number of units that make up one.
pub fn grid_units(step: f64) -> Result<usize> {
    if !(GRID_MIN_STEP..=1.0).contains(&step) {
        return Err(Error::TooLarge {
            what: "grid search",
            detail: format!("step {step} outside [{GRID_MIN_STEP}, 1]"),
        });
    }
    let units = (1.0 / step).round();
    if (units * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} does not divide 1"
        )));
    }
    Ok(units as usize)
}

/// Calls `visit` on every point `k/units` of the simplex with `labels`
/// coordinates, in lexicographic order of `k`.
pub fn for_each_grid_point(labels: usize, units: usize, mut visit: impl FnMut(&[f64])) {
    fn recurse(
        pos: usize,
        left: usize,
        units: usize,
        point: &mut [f64],
        visit: &mut dyn FnMut(&[f64]),
    ) {
        if pos + 1 == point.len() {
            point[pos] = left as f64 / units as f64;
            visit(point);
            return;
        }
        for k in 0..=left {
            point[pos] = k as f64 / units as f64;
            recurse(pos + 1, left - k, units, point, visit);
        }
    }
    let mut point = vec![0.0; labels];
    recurse(0, units, units, &mut point, &mut visit);
}

/// Exhaustive minimization of `kind` over the grid with resolution `step`.
///
/// Rows are searched independently. Ties keep the first point in
/// lexicographic order, so unvisited rows come back as the last vertex.
pub fn grid_minimize(
    kind: LossKind,
    d: &Dataset,
    r: Option<&TransferData>,
    step: f64,
) -> Result<(ConditionalDensity, f64)> {
    if d.labels() > GRID_MAX_LABELS {
        return Err(Error::TooLarge {
            what: "grid search",
            detail: format!("{} labels > {GRID_MAX_LABELS}", d.labels()),
        });
    }
    let units = grid_units(step)?;
    let mut rows = Vec::with_capacity(d.inputs());
    let mut total = 0.0;
    for s in 0..d.inputs() {
        let teacher = teacher_probs(kind, d, r, s)?;
        let counts = d.counts_row(s);
        let mut best = (f64::INFINITY, Vec::new());
        for_each_grid_point(d.labels(), units, |point| {
            let loss = row_loss(kind, point, counts, &teacher);
            if best.1.is_empty() || loss < best.0 {
                best = (loss, point.to_vec());
            }
        });
        total += best.0;
        rows.push(best.1);
    }
    Ok((ConditionalDensity::new(rows)?, total))
}

/// Worst-case loss increase when every entry of the closed-form student is
/// moved by less than `step`, which bounds how far the best grid point can
/// sit above the true minimum. Infinite when a sampled entry is within
/// `step` of zero.
pub fn grid_slack(
    kind: LossKind,
    closed: &ConditionalDensity,
    d: &Dataset,
    r: Option<&TransferData>,
    step: f64,
) -> Result<f64> {
    let mut slack = 0.0;
    for s in 0..d.inputs() {
        let teacher = teacher_probs(kind, d, r, s)?;
        for (a, &c) in d.counts_row(s).iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = closed.prob(s, a);
            if p <= step {
                return Ok(f64::INFINITY);
            }
            let drop = (p / (p - step)).ln();
            let c = c as f64;
            slack += match kind {
                LossKind::HardCe => c * drop,
                LossKind::PartialCe => c * teacher[a].unwrap_or(0.0) * drop,
                LossKind::PartialSel => {
                    let gap = (p.ln() - teacher[a].unwrap_or(1.0).ln()).abs() + drop;
                    0.5 * c * gap * gap
                }
            };
        }
    }
    Ok(slack)
}

/// Exact `E cond_tv(π̂, π*, ρ)` over all `(S·A)^n` ordered samples.
pub fn exact_expected_risk(
    rho: &InputDistribution,
    pi_star: &ConditionalDensity,
    est: EstimatorKind,
    n: u64,
) -> Result<f64> {
    if rho.len() != pi_star.inputs() {
        return Err(Error::DimensionMismatch {
            context: "exact_expected_risk",
            expected: pi_star.inputs(),
            found: rho.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let (inputs, labels) = (pi_star.inputs(), pi_star.labels());
    let cells = inputs * labels;
    let outcomes = u32::try_from(n)
        .ok()
        .and_then(|k| (cells as u64).checked_pow(k))
        .filter(|&total| total <= ENUMERATION_LIMIT)
        .ok_or_else(|| Error::TooLarge {
            what: "risk enumeration",
            detail: format!("({inputs}·{labels})^{n} > {ENUMERATION_LIMIT}"),
        })?;

    let cell_prob: Vec<f64> = (0..cells)
        .map(|i| rho.probs()[i / labels] * pi_star.prob(i / labels, i % labels))
        .collect();
    let mut tuple = vec![0usize; n as usize];
    let mut expected = 0.0;
    for _ in 0..outcomes {
        let weight: f64 = tuple.iter().map(|&i| cell_prob[i]).product();
        if weight > 0.0 {
            let mut counts = vec![0u64; cells];
            tuple.iter().for_each(|&i| counts[i] += 1);
            let d = Dataset::from_counts(inputs, labels, counts)?;
            let side = disclose(est.required_level(), &d, pi_star)?;
            let student = est.fit(&d, &side)?;
            expected += weight * cond_tv(&student, pi_star, rho)?;
        }
        // Mixed-radix increment.
        for digit in tuple.iter_mut() {
            *digit += 1;
            if *digit < cells {
                break;
            }
            *digit = 0;
        }
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_mle, EstimatorKind};
    use crate::model::expected_missing_mass;
    use crate::sampling::derive_partial;

    #[test]
    fn hard_ce_at_mle() {
        let d = Dataset::from_counts(1, 2, vec![2, 1]).unwrap();
        let loss = loss_eval(LossKind::HardCe, &fit_mle(&d).unwrap(), &d, None).unwrap();
        let expected = -2.0 * (2.0f64 / 3.0).ln() - (1.0f64 / 3.0).ln();
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 1.9095).abs() < 1e-4);
    }

    #[test]
    fn zero_mass_on_sample_is_infinite() {
        let d = Dataset::from_counts(1, 2, vec![2, 1]).unwrap();
        let pi = ConditionalDensity::new(vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            loss_eval(LossKind::HardCe, &pi, &d, None).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn sel_zero_at_teacher() {
        let pi_star = ConditionalDensity::new(vec![vec![0.5, 0.3, 0.2]]).unwrap();
        let d = Dataset::from_counts(1, 3, vec![3, 0, 2]).unwrap();
        let r = derive_partial(&d, &pi_star).unwrap();
        let sel = EstimatorKind::EmpSel.fit(&d, &r).unwrap();
        assert_eq!(
            loss_eval(LossKind::PartialSel, &sel, &d, Some(&r)).unwrap(),
            0.0
        );
    }

    #[test]
    fn partial_losses_need_side_information() {
        let d = Dataset::from_counts(1, 2, vec![1, 1]).unwrap();
        let pi = ConditionalDensity::uniform(1, 2).unwrap();
        let hard = TransferData::hard(&d);
        assert!(matches!(
            loss_eval(LossKind::PartialCe, &pi, &d, None),
            Err(Error::Protocol { .. })
        ));
        assert!(matches!(
            loss_eval(LossKind::PartialSel, &pi, &d, Some(&hard)),
            Err(Error::Protocol { .. })
        ));
    }

    #[test]
    fn grid_counts() {
        let mut points = 0;
        for_each_grid_point(3, 50, |p| {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            points += 1;
        });
        assert_eq!(points, 1326);
    }

    #[test]
    fn grid_guards() {
        let d = Dataset::from_counts(1, 5, vec![1, 0, 0, 0, 0]).unwrap();
        assert!(matches!(
            grid_minimize(LossKind::HardCe, &d, None, 0.1),
            Err(Error::TooLarge { .. })
        ));
        let d = Dataset::from_counts(1, 2, vec![1, 0]).unwrap();
        assert!(matches!(
            grid_minimize(LossKind::HardCe, &d, None, 0.005),
            Err(Error::TooLarge { .. })
        ));
        assert!(grid_minimize(LossKind::HardCe, &d, None, 0.03).is_err());
    }

    #[test]
    fn grid_recovers_hard_ce_minimum() {
        let d = Dataset::from_counts(1, 3, vec![2, 1, 0]).unwrap();
        let closed = fit_mle(&d).unwrap();
        let best = loss_eval(LossKind::HardCe, &closed, &d, None).unwrap();
        let (_, grid) = grid_minimize(LossKind::HardCe, &d, None, 0.02).unwrap();
        let slack = grid_slack(LossKind::HardCe, &closed, &d, None, 0.02).unwrap();
        assert!(best <= grid + 1e-12);
        assert!(grid <= best + slack);
    }

    #[test]
    fn grid_recovers_partial_ce_argmin() {
        let d = Dataset::from_counts(1, 2, vec![1, 1]).unwrap();
        let r = TransferData::partial(&d, [((0, 0), 0.8), ((0, 1), 0.2)]).unwrap();
        let (argmin, _) = grid_minimize(LossKind::PartialCe, &d, Some(&r), 0.02).unwrap();
        assert!((argmin.prob(0, 0) - 0.8).abs() <= 0.02 + 1e-12);
        assert!((argmin.prob(0, 1) - 0.2).abs() <= 0.02 + 1e-12);
    }

    #[test]
    fn rows_decompose() {
        // Joint search over both rows agrees with the per-row search.
        let d = Dataset::from_counts(2, 2, vec![3, 1, 1, 2]).unwrap();
        let pi_star = ConditionalDensity::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let r = derive_partial(&d, &pi_star).unwrap();
        for kind in LossKind::ALL {
            let (_, per_row) = grid_minimize(kind, &d, Some(&r), 0.05).unwrap();
            let mut joint = f64::INFINITY;
            for i in 0..=20 {
                for j in 0..=20 {
                    let (p, q) = (i as f64 / 20.0, j as f64 / 20.0);
                    let pi =
                        ConditionalDensity::new(vec![vec![p, 1.0 - p], vec![q, 1.0 - q]]).unwrap();
                    joint = joint.min(loss_eval(kind, &pi, &d, Some(&r)).unwrap());
                }
            }
            assert!(
                (joint - per_row).abs() < 1e-12,
                "{kind}: {joint} vs {per_row}"
            );
        }
    }

    #[test]
    fn exact_risk_examples() {
        let rho = InputDistribution::new(vec![1.0]).unwrap();
        let fair = ConditionalDensity::new(vec![vec![0.5, 0.5]]).unwrap();
        let mle = exact_expected_risk(&rho, &fair, EstimatorKind::Mle, 2).unwrap();
        assert!((mle - 0.25).abs() < 1e-15);
        let sel = exact_expected_risk(&rho, &fair, EstimatorKind::EmpSel, 1).unwrap();
        assert!(sel.abs() < 1e-15);

        let rho = InputDistribution::uniform(2).unwrap();
        let dirac = ConditionalDensity::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let full = exact_expected_risk(&rho, &dirac, EstimatorKind::FullKl, 1).unwrap();
        assert!((full - 0.25).abs() < 1e-15);
        assert!(full <= expected_missing_mass(rho.probs(), 1));
    }

    #[test]
    fn enumeration_guard() {
        let rho = InputDistribution::uniform(2).unwrap();
        let pi = ConditionalDensity::uniform(2, 3).unwrap();
        assert!(exact_expected_risk(&rho, &pi, EstimatorKind::Mle, 8).is_ok());
        assert!(matches!(
            exact_expected_risk(&rho, &pi, EstimatorKind::Mle, 9),
            Err(Error::TooLarge { .. })
        ));
    }
}
