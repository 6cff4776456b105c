//! Oracle suites comparing the closed forms and the Monte Carlo harness
//! against the brute-force references in [`crate::oracle`].
//!
//! Every check reports a deviation `observed` and passes when
//! `observed ≤ bound`.

use std::fmt;

use rand::Rng;

use crate::error::Result;
use crate::estimators::EstimatorKind;
use crate::harness::estimate_risk;
use crate::model::{expected_missing_mass, ConditionalDensity, Dataset, InputDistribution};
use crate::oracle::{
    exact_expected_risk, grid_minimize, grid_slack, grid_units, loss_eval, LossKind,
};
use crate::sampling::{derive_partial, RngSeed, Sampler};

/// Stream label for random problems generated by the suites.
const SUITE_STREAM: u64 = 0x6f72_6163_6c65;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.observed <= self.bound
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:.6e} {:.6e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.bound
        )
    }
}

fn random_simplex<R: Rng>(rng: &mut R, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| floor + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// A grid row with at least two units of mass on every label.
fn random_grid_row<R: Rng>(rng: &mut R, labels: usize, units: usize) -> Vec<f64> {
    let mut k = vec![2usize; labels];
    for _ in 0..units.saturating_sub(2 * labels) {
        k[rng.random_range(0..labels)] += 1;
    }
    k.into_iter().map(|k| k as f64 / units as f64).collect()
}

/// Closed-form optimality against exhaustive grid search on `problems`
/// seeded random datasets with S ≤ 2, A = 3, n ≤ 6.
pub fn closed_form_suite(problems: usize, step: f64, seed: u64) -> Result<Vec<Check>> {
    let units = grid_units(step)?;
    let mut above_grid = [f64::NEG_INFINITY; 3];
    let mut beyond_slack = [f64::NEG_INFINITY; 3];
    let mut sel_loss = 0.0f64;
    let mut sel_grid = 0.0f64;

    for i in 0..problems {
        let mut rng = RngSeed::new(seed)
            .instance(SUITE_STREAM)
            .replicate(i as u64)
            .rng();
        let inputs = rng.random_range(1..=2usize);
        let labels = 3;
        let n = rng.random_range(1..=6u64);
        let rho = InputDistribution::new(random_simplex(&mut rng, inputs, 0.2))?;
        let rows = (0..inputs)
            .map(|_| random_grid_row(&mut rng, labels, units))
            .collect();
        let pi_star = ConditionalDensity::new(rows)?;
        let d = Sampler::new(&rho, &pi_star)?.dataset(n, &mut rng)?;
        let r = derive_partial(&d, &pi_star)?;

        for (slot, kind) in LossKind::ALL.into_iter().enumerate() {
            let closed = kind.minimizer().fit(&d, &r)?;
            let best = loss_eval(kind, &closed, &d, Some(&r))?;
            let (_, grid) = grid_minimize(kind, &d, Some(&r), step)?;
            let slack = grid_slack(kind, &closed, &d, Some(&r), step)?;
            above_grid[slot] = above_grid[slot].max(best - grid - 1e-9 * grid.abs().max(1.0));
            beyond_slack[slot] = beyond_slack[slot].max(grid - best - slack);
            if kind == LossKind::PartialSel {
                sel_loss = sel_loss.max(best);
                sel_grid = sel_grid.max(grid);
            }
        }
    }

    let mut checks = Vec::new();
    for (slot, kind) in LossKind::ALL.into_iter().enumerate() {
        checks.push(Check::new(
            format!("closed-forms/{kind}/closed-not-above-grid[{problems}]"),
            above_grid[slot],
            0.0,
        ));
        checks.push(Check::new(
            format!("closed-forms/{kind}/grid-within-slack[{problems}]"),
            beyond_slack[slot],
            0.0,
        ));
    }
    checks.push(Check::new(
        format!("closed-forms/partial-sel/closed-attains-zero[{problems}]"),
        sel_loss,
        0.0,
    ));
    checks.push(Check::new(
        format!("closed-forms/partial-sel/grid-attains-zero[{problems}]"),
        sel_grid,
        1e-20,
    ));

    checks.extend(closed_form_examples(step)?);
    Ok(checks)
}

fn closed_form_examples(step: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let d = Dataset::from_counts(1, 2, vec![2, 1])?;
    let mle = EstimatorKind::Mle.fit(&d, &crate::model::TransferData::hard(&d))?;
    let best = loss_eval(LossKind::HardCe, &mle, &d, None)?;
    let (_, grid) = grid_minimize(LossKind::HardCe, &d, None, step)?;
    let slack = grid_slack(LossKind::HardCe, &mle, &d, None, step)?;
    checks.push(Check::new(
        "closed-forms/example/hard-ce-counts-2-1",
        grid - best,
        slack,
    ));

    let d = Dataset::from_counts(1, 2, vec![1, 1])?;
    let r = crate::model::TransferData::partial(&d, [((0, 0), 0.8), ((0, 1), 0.2)])?;
    let (argmin, _) = grid_minimize(LossKind::PartialCe, &d, Some(&r), step)?;
    let dist = (argmin.prob(0, 0) - 0.8)
        .abs()
        .max((argmin.prob(0, 1) - 0.2).abs());
    checks.push(Check::new(
        "closed-forms/example/partial-ce-argmin",
        dist,
        step + 1e-12,
    ));

    // Row-wise search agrees with a joint search over both rows.
    let d = Dataset::from_counts(2, 2, vec![3, 1, 1, 2])?;
    let pi_star = ConditionalDensity::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]])?;
    let r = derive_partial(&d, &pi_star)?;
    let units = grid_units(step)?;
    for kind in LossKind::ALL {
        let (_, per_row) = grid_minimize(kind, &d, Some(&r), step)?;
        let mut joint = f64::INFINITY;
        for i in 0..=units {
            for j in 0..=units {
                let (p, q) = (i as f64 / units as f64, j as f64 / units as f64);
                let pi = ConditionalDensity::new(vec![vec![p, 1.0 - p], vec![q, 1.0 - q]])?;
                joint = joint.min(loss_eval(kind, &pi, &d, Some(&r))?);
            }
        }
        checks.push(Check::new(
            format!("closed-forms/row-decomposition/{kind}"),
            (joint - per_row).abs(),
            1e-9,
        ));
    }
    Ok(checks)
}

/// The enumeration grid S, A, n ∈ {1,2}×{2,3}×{1,2,3}.
pub fn enumeration_grid() -> Vec<(usize, usize, u64)> {
    let mut grid = Vec::new();
    for inputs in [1, 2] {
        for labels in [2, 3] {
            for n in [1, 2, 3] {
                grid.push((inputs, labels, n));
            }
        }
    }
    grid
}

/// Seeded random (ρ, π*) used for one enumeration configuration.
pub fn enumeration_problem(
    inputs: usize,
    labels: usize,
    seed: u64,
) -> Result<(InputDistribution, ConditionalDensity)> {
    let mut rng = RngSeed::new(seed)
        .instance(SUITE_STREAM + 1)
        .n((inputs * 16 + labels) as u64)
        .rng();
    let rho = InputDistribution::new(random_simplex(&mut rng, inputs, 0.2))?;
    let rows = (0..inputs)
        .map(|_| random_simplex(&mut rng, labels, 0.1))
        .collect();
    Ok((rho, ConditionalDensity::new(rows)?))
}

/// Exact enumeration against known values and against Monte Carlo
/// estimates with `replicates` draws (agreement within 4 stderr).
pub fn exact_risk_suite(replicates: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let one = InputDistribution::new(vec![1.0])?;
    let fair = ConditionalDensity::new(vec![vec![0.5, 0.5]])?;
    let mle = exact_expected_risk(&one, &fair, EstimatorKind::Mle, 2)?;
    checks.push(Check::new(
        "exact-risk/mle-fair-coin-n2=0.25",
        (mle - 0.25).abs(),
        1e-12,
    ));
    let sel = exact_expected_risk(&one, &fair, EstimatorKind::EmpSel, 1)?;
    checks.push(Check::new(
        "exact-risk/empsel-fair-coin-n1=0",
        sel.abs(),
        1e-12,
    ));
    let half = InputDistribution::uniform(2)?;
    let dirac = ConditionalDensity::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let full = exact_expected_risk(&half, &dirac, EstimatorKind::FullKl, 1)?;
    checks.push(Check::new(
        "exact-risk/fullkl-dirac-n1=0.25",
        (full - 0.25).abs(),
        1e-12,
    ));

    let mut cases = vec![("fair-coin".to_string(), one, fair, EstimatorKind::Mle, 2u64)];
    for (inputs, labels, n) in enumeration_grid() {
        let (rho, pi_star) = enumeration_problem(inputs, labels, seed)?;
        for est in EstimatorKind::ALL {
            cases.push((
                format!("S{inputs}-A{labels}-n{n}"),
                rho.clone(),
                pi_star.clone(),
                est,
                n,
            ));
        }
    }
    for (i, (label, rho, pi_star, est, n)) in cases.into_iter().enumerate() {
        let exact = exact_expected_risk(&rho, &pi_star, est, n)?;
        let mc = estimate_risk(
            &rho,
            &pi_star,
            est,
            n,
            replicates,
            RngSeed::new(seed).instance(SUITE_STREAM + 2 + i as u64),
        )?;
        checks.push(Check::new(
            format!("exact-risk/monte-carlo/{est}/{label}"),
            (mc.mean - exact).abs(),
            4.0 * mc.stderr + 1e-12,
        ));
        if est == EstimatorKind::FullKl {
            checks.push(Check::new(
                format!("exact-risk/fullkl-below-missing-mass/{label}"),
                exact - expected_missing_mass(rho.probs(), n),
                1e-12,
            ));
        }
    }
    Ok(checks)
}
