//! Scalar metrics on distributions, conditional densities and samples.

use crate::error::{Error, Result};
use crate::model::{ConditionalDensity, InputDistribution};

fn same_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Total variation `0.5 · ‖p − q‖₁`.
pub fn tv(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len("tv", p.len(), q.len())?;
    Ok(tv_unchecked(p, q))
}

fn tv_unchecked(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// ρ-weighted average of the row-wise total variation between two students.
pub fn cond_tv(
    pi1: &ConditionalDensity,
    pi2: &ConditionalDensity,
    rho: &InputDistribution,
) -> Result<f64> {
    same_len("cond_tv inputs", pi1.inputs(), pi2.inputs())?;
    same_len("cond_tv labels", pi1.labels(), pi2.labels())?;
    same_len("cond_tv input distribution", pi1.inputs(), rho.len())?;
    Ok(rho
        .probs()
        .iter()
        .zip(pi1.rows().zip(pi2.rows()))
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, (r1, r2))| w * tv_unchecked(r1, r2))
        .sum())
}

/// `KL(p‖q) = Σ p log(p/q)` with `0 log 0 = 0`.
pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len("kl", p.len(), q.len())?;
    let mut total = 0.0;
    for (i, (&pa, &qa)) in p.iter().zip(q).enumerate() {
        if pa == 0.0 {
            continue;
        }
        if qa <= 0.0 {
            return Err(Error::DivergenceUndefined { index: i });
        }
        total += pa * (pa / qa).ln();
    }
    // Rounding can leave a tiny negative value when p == q.
    Ok(total.max(0.0))
}

/// Mass of `nu` on atoms whose count is zero.
pub fn missing_mass(nu: &[f64], counts: &[u64]) -> Result<f64> {
    same_len("missing_mass", nu.len(), counts.len())?;
    Ok(nu
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c == 0)
        .map(|(p, _)| p)
        .sum())
}

/// Exact `E m(ν, Xⁿ) = Σ ν(x)(1 − ν(x))ⁿ` for `n` i.i.d. draws.
pub fn expected_missing_mass(nu: &[f64], n: u64) -> f64 {
    nu.iter()
        .map(|&p| match i32::try_from(n) {
            Ok(k) => p * (1.0 - p).powi(k),
            Err(_) => p * (1.0 - p).powf(n as f64),
        })
        .sum()
}

/// Distance of the teacher from the nearest deterministic policy,
/// `2 · max_s min_a (1 − π*(a|s))`.
pub fn xi(pi_star: &ConditionalDensity) -> f64 {
    2.0 * pi_star
        .rows()
        .map(|row| row.iter().map(|p| 1.0 - p).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
