//! The four students, each in closed form.
//!
//! | kind     | needs                 | row at a visited input `s`                   |
//! |----------|-----------------------|----------------------------------------------|
//! | `Mle`    | hard labels           | `n(s,a) / n(s)`                              |
//! | `EmpCe`  | partial soft labels   | `∝ n(s,a) · π*(a|s)`                         |
//! | `EmpSel` | partial soft labels   | `π*(a|s)` on seen labels, residual spread    |
//! | `FullKl` | soft labels           | `π*(·|s)`                                    |
//!
//! Rows at unvisited inputs, and EmpSEL's residual over unseen labels, are
//! not pinned down by the losses. They come from a [`StudentInit`]; the
//! default [`UniformInit`] uses Uniform(A) rows and splits the residual
//! equally.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ConditionalDensity, Dataset, DisclosureLevel, TransferData};

/// Residual mass below this is treated as float drift and clipped to zero.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Mle,
    EmpCe,
    EmpSel,
    FullKl,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [Self::Mle, Self::EmpCe, Self::EmpSel, Self::FullKl];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Mle => "mle",
            Self::EmpCe => "empce",
            Self::EmpSel => "empsel",
            Self::FullKl => "fullkl",
        }
    }

    /// Stable numeric id used to label random streams.
    pub fn id(self) -> u64 {
        match self {
            Self::Mle => 0,
            Self::EmpCe => 1,
            Self::EmpSel => 2,
            Self::FullKl => 3,
        }
    }

    pub fn required_level(self) -> DisclosureLevel {
        match self {
            Self::Mle => DisclosureLevel::HardLabels,
            Self::EmpCe | Self::EmpSel => DisclosureLevel::PartialSoftLabels,
            Self::FullKl => DisclosureLevel::SoftLabels,
        }
    }

    /// Fits with the default uniform initialization.
    pub fn fit(self, d: &Dataset, side: &TransferData) -> Result<ConditionalDensity> {
        self.fit_with(d, side, &UniformInit)
    }

    pub fn fit_with(
        self,
        d: &Dataset,
        side: &TransferData,
        init: &dyn StudentInit,
    ) -> Result<ConditionalDensity> {
        self.check_protocol(side)?;
        side.check_shape(d)?;
        match self {
            Self::Mle => fit_mle_with(d, init),
            Self::EmpCe => fit_empce_with(d, side, init),
            Self::EmpSel => fit_empsel_with(d, side, init),
            Self::FullKl => fit_fullkl_with(d, side, init),
        }
    }

    fn check_protocol(self, side: &TransferData) -> Result<()> {
        let required = self.required_level();
        // Levels are nested: a richer disclosure contains every poorer one.
        if side.level() < required {
            return Err(Error::Protocol {
                estimator: self.tag(),
                required: required.name(),
                given: side.level().name(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator '{s}'")))
    }
}

/// Policy for the parts of a student that the data leaves free.
pub trait StudentInit: Sync {
    /// Row used for an input that never appears in the dataset.
    fn unseen_input(&self, input: usize, labels: usize) -> Vec<f64>;

    /// Distributes `residual` over the labels in `unseen` (all with zero
    /// mass so far in `row`).
    fn spread_residual(&self, input: usize, residual: f64, unseen: &[usize], row: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformInit;

impl StudentInit for UniformInit {
    fn unseen_input(&self, _input: usize, labels: usize) -> Vec<f64> {
        vec![1.0 / labels as f64; labels]
    }

    fn spread_residual(&self, _input: usize, residual: f64, unseen: &[usize], row: &mut [f64]) {
        let share = residual / unseen.len() as f64;
        for &a in unseen {
            row[a] = share;
        }
    }
}

fn build_rows(
    d: &Dataset,
    init: &dyn StudentInit,
    mut visited_row: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<ConditionalDensity> {
    let rows = (0..d.inputs())
        .map(|s| {
            if d.is_visited(s) {
                visited_row(s)
            } else {
                Ok(init.unseen_input(s, d.labels()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ConditionalDensity::new(rows)
}

pub fn fit_mle(d: &Dataset) -> Result<ConditionalDensity> {
    fit_mle_with(d, &UniformInit)
}

pub fn fit_mle_with(d: &Dataset, init: &dyn StudentInit) -> Result<ConditionalDensity> {
    build_rows(d, init, |s| {
        let visits = d.visits(s) as f64;
        Ok(d.counts_row(s).iter().map(|&c| c as f64 / visits).collect())
    })
}

fn sampled_probability(side: &TransferData, s: usize, a: usize) -> Result<f64> {
    side.sampled_probability(s, a)
        .ok_or_else(|| Error::InconsistentSideInformation {
            input: s,
            reason: format!("no teacher probability for sampled label {a}"),
        })
}

pub fn fit_empce(d: &Dataset, side: &TransferData) -> Result<ConditionalDensity> {
    EstimatorKind::EmpCe.fit(d, side)
}

fn fit_empce_with(
    d: &Dataset,
    side: &TransferData,
    init: &dyn StudentInit,
) -> Result<ConditionalDensity> {
    build_rows(d, init, |s| {
        let mut row = vec![0.0; d.labels()];
        for (a, &c) in d.counts_row(s).iter().enumerate() {
            if c > 0 {
                row[a] = c as f64 * sampled_probability(side, s, a)?;
            }
        }
        let z: f64 = row.iter().sum();
        if z.is_nan() || z <= 0.0 {
            return Err(Error::InconsistentSideInformation {
                input: s,
                reason: format!("normalizer {z} at a visited input"),
            });
        }
        row.iter_mut().for_each(|v| *v /= z);
        Ok(row)
    })
}

/// Limit of the empirical cross-entropy student as n → ∞ for a fixed
/// teacher row: the squared row, renormalized.
pub fn empce_limit_row(pi_star_row: &[f64]) -> Vec<f64> {
    let z: f64 = pi_star_row.iter().map(|p| p * p).sum();
    pi_star_row.iter().map(|p| p * p / z).collect()
}

pub fn fit_empsel(d: &Dataset, side: &TransferData) -> Result<ConditionalDensity> {
    EstimatorKind::EmpSel.fit(d, side)
}

fn fit_empsel_with(
    d: &Dataset,
    side: &TransferData,
    init: &dyn StudentInit,
) -> Result<ConditionalDensity> {
    build_rows(d, init, |s| {
        let mut row = vec![0.0; d.labels()];
        let mut unseen = Vec::new();
        for (a, &c) in d.counts_row(s).iter().enumerate() {
            if c > 0 {
                row[a] = sampled_probability(side, s, a)?;
            } else {
                unseen.push(a);
            }
        }
        let residual = 1.0 - row.iter().sum::<f64>();
        if residual < -RESIDUAL_TOLERANCE {
            return Err(Error::InconsistentSideInformation {
                input: s,
                reason: format!("seen labels carry {} > 1 teacher mass", 1.0 - residual),
            });
        }
        if !unseen.is_empty() {
            init.spread_residual(s, residual.clamp(0.0, 1.0), &unseen, &mut row);
        }
        Ok(row)
    })
}

pub fn fit_fullkl(d: &Dataset, side: &TransferData) -> Result<ConditionalDensity> {
    EstimatorKind::FullKl.fit(d, side)
}

fn fit_fullkl_with(
    d: &Dataset,
    side: &TransferData,
    init: &dyn StudentInit,
) -> Result<ConditionalDensity> {
    build_rows(d, init, |s| {
        side.teacher_row(s)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::InconsistentSideInformation {
                input: s,
                reason: "no teacher row for a visited input".into(),
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cond_tv, missing_mass, tv, InputDistribution};
    use crate::sampling::{derive_full, derive_partial, draw_dataset, RngSeed};
    use proptest::prelude::*;

    fn assert_row(actual: &[f64], expected: &[f64]) {
        assert_eq!(actual.len(), expected.len());
        for (x, y) in actual.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn mle_examples() {
        let d = Dataset::from_counts(2, 2, vec![2, 1, 0, 0]).unwrap();
        let pi = fit_mle(&d).unwrap();
        assert_row(pi.row(0), &[2.0 / 3.0, 1.0 / 3.0]);
        assert_row(pi.row(1), &[0.5, 0.5]);

        let d = Dataset::from_counts(2, 4, vec![1, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_row(fit_mle(&d).unwrap().row(1), &[0.25; 4]);
    }

    #[test]
    fn empce_examples() {
        let d = Dataset::from_counts(1, 2, vec![2, 1]).unwrap();
        let r = TransferData::partial(&d, [((0, 0), 0.5), ((0, 1), 0.5)]).unwrap();
        assert_row(fit_empce(&d, &r).unwrap().row(0), &[2.0 / 3.0, 1.0 / 3.0]);

        let d = Dataset::from_counts(1, 2, vec![1, 1]).unwrap();
        let r = TransferData::partial(&d, [((0, 0), 0.8), ((0, 1), 0.2)]).unwrap();
        assert_row(fit_empce(&d, &r).unwrap().row(0), &[0.8, 0.2]);
    }

    #[test]
    fn empce_zero_on_unobserved_labels() {
        let d = Dataset::from_counts(1, 3, vec![3, 0, 1]).unwrap();
        let r = TransferData::partial(&d, [((0, 0), 0.2), ((0, 2), 0.4)]).unwrap();
        assert_row(fit_empce(&d, &r).unwrap().row(0), &[0.6, 0.0, 0.4]);
    }

    #[test]
    fn empce_zero_normalizer_is_an_error() {
        let d = Dataset::from_counts(1, 2, vec![1, 0]).unwrap();
        let mut r = TransferData::partial(&d, [((0, 0), 0.5)]).unwrap();
        // Only reachable with corrupted side-information.
        r.partial = Some(vec![Some(0.0), None]);
        assert!(matches!(
            fit_empce(&d, &r),
            Err(Error::InconsistentSideInformation { input: 0, .. })
        ));
    }

    #[test]
    fn empce_limit_examples() {
        assert_row(&empce_limit_row(&[0.75, 0.25]), &[0.9, 0.1]);
        assert_row(&empce_limit_row(&[0.25; 4]), &[0.25; 4]);
        assert_row(&empce_limit_row(&[0.0, 1.0, 0.0]), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn empsel_examples() {
        let pi_row = [0.5, 0.3, 0.2];
        let cases: [(&[u64], [f64; 3]); 3] = [
            (&[4, 0, 0], [0.5, 0.25, 0.25]),
            (&[1, 2, 1], pi_row),
            (&[2, 1, 0], pi_row),
        ];
        for (counts, expected) in cases {
            let d = Dataset::from_counts(1, 3, counts.to_vec()).unwrap();
            let entries = d
                .support()
                .map(|(s, a)| ((s, a), pi_row[a]))
                .collect::<Vec<_>>();
            let r = TransferData::partial(&d, entries).unwrap();
            assert_row(fit_empsel(&d, &r).unwrap().row(0), &expected);
        }
    }

    #[test]
    fn empsel_rejects_overfull_rows() {
        let d = Dataset::from_counts(1, 3, vec![1, 1, 0]).unwrap();
        let r = TransferData::partial(&d, [((0, 0), 0.7), ((0, 1), 0.6)]).unwrap();
        assert!(matches!(
            fit_empsel(&d, &r),
            Err(Error::InconsistentSideInformation { .. })
        ));
    }

    #[test]
    fn fullkl_examples() {
        let pi_star = ConditionalDensity::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let rho = InputDistribution::new(vec![0.4, 0.6]).unwrap();
        let d = Dataset::from_counts(2, 2, vec![1, 2, 0, 0]).unwrap();
        let q = derive_full(&d, &pi_star).unwrap();
        let pi = fit_fullkl(&d, &q).unwrap();
        assert_eq!(pi.row(0), pi_star.row(0));
        assert_row(pi.row(1), &[0.5, 0.5]);
        let risk = cond_tv(&pi, &pi_star, &rho).unwrap();
        let expected = 0.6 * tv(&[0.5, 0.5], pi_star.row(1)).unwrap();
        assert!((risk - expected).abs() < 1e-15);
    }

    #[test]
    fn protocol_gating() {
        let d = Dataset::from_counts(1, 2, vec![1, 1]).unwrap();
        let pi_star = ConditionalDensity::new(vec![vec![0.4, 0.6]]).unwrap();
        let hard = TransferData::hard(&d);
        let partial = derive_partial(&d, &pi_star).unwrap();
        let full = derive_full(&d, &pi_star).unwrap();

        assert!(matches!(
            EstimatorKind::EmpSel.fit(&d, &hard),
            Err(Error::Protocol { .. })
        ));
        assert!(matches!(
            EstimatorKind::EmpCe.fit(&d, &hard),
            Err(Error::Protocol { .. })
        ));
        assert!(matches!(
            EstimatorKind::FullKl.fit(&d, &partial),
            Err(Error::Protocol { .. })
        ));
        assert!(EstimatorKind::Mle.fit(&d, &hard).is_ok());
        // Soft labels restricted to sampled pairs serve the partial learners.
        assert_eq!(
            EstimatorKind::EmpCe.fit(&d, &full).unwrap(),
            EstimatorKind::EmpCe.fit(&d, &partial).unwrap()
        );
        assert_eq!(
            EstimatorKind::EmpSel.fit(&d, &full).unwrap(),
            EstimatorKind::EmpSel.fit(&d, &partial).unwrap()
        );
    }

    #[test]
    fn init_hook_is_honored() {
        struct FirstLabel;
        impl StudentInit for FirstLabel {
            fn unseen_input(&self, _: usize, labels: usize) -> Vec<f64> {
                let mut row = vec![0.0; labels];
                row[0] = 1.0;
                row
            }
            fn spread_residual(&self, _: usize, residual: f64, unseen: &[usize], row: &mut [f64]) {
                row[unseen[0]] = residual;
            }
        }
        let d = Dataset::from_counts(2, 3, vec![0, 1, 0, 0, 0, 0]).unwrap();
        let r = TransferData::partial(&d, [((0, 1), 0.4)]).unwrap();
        let pi = EstimatorKind::EmpSel.fit_with(&d, &r, &FirstLabel).unwrap();
        assert_row(pi.row(0), &[0.6, 0.4, 0.0]);
        assert_row(pi.row(1), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn tags_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.tag().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("ce".parse::<EstimatorKind>().is_err());
    }

    fn teacher(kinds: Vec<u8>, labels: usize) -> ConditionalDensity {
        let rows = kinds
            .into_iter()
            .enumerate()
            .map(|(s, k)| {
                if k == 0 {
                    vec![1.0 / labels as f64; labels]
                } else {
                    let mut row = vec![0.0; labels];
                    row[(s + k as usize) % labels] = 1.0;
                    row
                }
            })
            .collect();
        ConditionalDensity::new(rows).unwrap()
    }

    fn positive_row(labels: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.02f64..1.0, labels).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn fitted_students_are_row_stochastic(
            rows in prop::collection::vec(positive_row(4), 1..5),
            n in 1u64..60,
            seed in any::<u64>(),
        ) {
            let pi_star = ConditionalDensity::new(rows).unwrap();
            let rho = InputDistribution::uniform(pi_star.inputs()).unwrap();
            let d = draw_dataset(&rho, &pi_star, n, RngSeed::new(seed)).unwrap();
            let full = derive_full(&d, &pi_star).unwrap();
            for kind in EstimatorKind::ALL {
                let pi = kind.fit(&d, &full).unwrap();
                for row in pi.rows() {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
                }
            }
            // Integer-exact frequencies.
            let mle = fit_mle(&d).unwrap();
            for s in (0..d.inputs()).filter(|&s| d.is_visited(s)) {
                for a in 0..d.labels() {
                    prop_assert_eq!(mle.prob(s, a), d.count(s, a) as f64 / d.visits(s) as f64);
                }
            }
        }

        #[test]
        fn empce_coincides_with_mle_for_uniform_or_dirac_teachers(
            kinds in prop::collection::vec(0u8..4, 1..5),
            n in 1u64..80,
            seed in any::<u64>(),
        ) {
            let pi_star = teacher(kinds, 4);
            let rho = InputDistribution::uniform(pi_star.inputs()).unwrap();
            let d = draw_dataset(&rho, &pi_star, n, RngSeed::new(seed)).unwrap();
            let r = derive_partial(&d, &pi_star).unwrap();
            let ce = fit_empce(&d, &r).unwrap();
            let mle = fit_mle(&d).unwrap();
            for s in 0..d.inputs() {
                for a in 0..4 {
                    prop_assert!((ce.prob(s, a) - mle.prob(s, a)).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn empsel_row_error_bounded_by_label_missing_mass(
            rows in prop::collection::vec(positive_row(5), 1..4),
            n in 1u64..40,
            seed in any::<u64>(),
        ) {
            let pi_star = ConditionalDensity::new(rows).unwrap();
            let rho = InputDistribution::uniform(pi_star.inputs()).unwrap();
            let d = draw_dataset(&rho, &pi_star, n, RngSeed::new(seed)).unwrap();
            let r = derive_partial(&d, &pi_star).unwrap();
            let pi = fit_empsel(&d, &r).unwrap();
            for s in (0..d.inputs()).filter(|&s| d.is_visited(s)) {
                let err = tv(pi.row(s), pi_star.row(s)).unwrap();
                let mm = missing_mass(pi_star.row(s), d.counts_row(s)).unwrap();
                prop_assert!(err <= mm + 1e-12);
            }
        }

        #[test]
        fn fullkl_risk_bounded_by_input_missing_mass(
            rho in positive_row(6),
            rows in prop::collection::vec(positive_row(3), 6),
            n in 1u64..30,
            seed in any::<u64>(),
        ) {
            let rho = InputDistribution::new(rho).unwrap();
            let pi_star = ConditionalDensity::new(rows).unwrap();
            let d = draw_dataset(&rho, &pi_star, n, RngSeed::new(seed)).unwrap();
            let q = derive_full(&d, &pi_star).unwrap();
            let pi = fit_fullkl(&d, &q).unwrap();
            let risk = cond_tv(&pi, &pi_star, &rho).unwrap();
            let mm = missing_mass(rho.probs(), &d.visit_counts()).unwrap();
            prop_assert!(risk <= mm + 1e-12);
            let exact: f64 = (0..6)
                .filter(|&s| !d.is_visited(s))
                .map(|s| rho.probs()[s] * tv(&[1.0 / 3.0; 3], pi_star.row(s)).unwrap())
                .sum();
            prop_assert!((risk - exact).abs() < 1e-12);
        }
    }
}
