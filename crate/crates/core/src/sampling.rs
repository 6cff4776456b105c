//! i.i.d. draws from ρ×π* and the side-information each disclosure level
//! derives from them.
//!
//! Every replicate owns a ChaCha stream keyed by a SHA-256 digest of
//! `(master, instance, estimator, n, replicate)`, so a replicate produces
//! the same dataset no matter which worker runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ConditionalDensity, Dataset, DisclosureLevel, InputDistribution, TransferData};

/// Labels of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed {
    pub master: u64,
    pub instance: u64,
    pub estimator: u64,
    pub n: u64,
    pub replicate: u64,
}

impl RngSeed {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            ..Self::default()
        }
    }

    pub fn instance(self, instance: u64) -> Self {
        Self { instance, ..self }
    }

    pub fn estimator(self, estimator: u64) -> Self {
        Self { estimator, ..self }
    }

    pub fn n(self, n: u64) -> Self {
        Self { n, ..self }
    }

    pub fn replicate(self, replicate: u64) -> Self {
        Self { replicate, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(b"transferlab/stream/v1");
        for word in [
            self.master,
            self.instance,
            self.estimator,
            self.n,
            self.replicate,
        ] {
            hasher.update(word.to_le_bytes());
        }
        let mut key = [0u8; 32];
        key.copy_from_slice(&hasher.finalize());
        ChaCha8Rng::from_seed(key)
    }
}

/// Cumulative table for inverse-CDF sampling.
///
/// The last bucket with positive mass is pinned to exactly 1, so any
/// `u ∈ [0, 1)` lands in a bucket of positive probability even when the
/// float partial sums fall short of one.
#[derive(Debug, Clone)]
struct Cdf(Vec<f64>);

impl Cdf {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
            cdf[last..].iter_mut().for_each(|c| *c = 1.0);
        }
        Self(cdf)
    }

    fn sample(&self, u: f64) -> usize {
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1)
    }
}

/// Precomputed sampler for the product law ρ×π*.
#[derive(Debug, Clone)]
pub struct Sampler {
    labels: usize,
    inputs: Cdf,
    rows: Vec<Cdf>,
}

impl Sampler {
    pub fn new(rho: &InputDistribution, pi_star: &ConditionalDensity) -> Result<Self> {
        if rho.len() != pi_star.inputs() {
            return Err(Error::DimensionMismatch {
                context: "sampler inputs",
                expected: pi_star.inputs(),
                found: rho.len(),
            });
        }
        Ok(Self {
            labels: pi_star.labels(),
            inputs: Cdf::new(rho.probs()),
            rows: pi_star.rows().map(Cdf::new).collect(),
        })
    }

    /// Draws one (input, label) pair.
    pub fn pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let s = self.inputs.sample(rng.random::<f64>());
        let a = self.rows[s].sample(rng.random::<f64>());
        (s, a)
    }

    pub fn dataset<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut counts = vec![0u64; self.rows.len() * self.labels];
        for _ in 0..n {
            let (s, a) = self.pair(rng);
            counts[s * self.labels + a] += 1;
        }
        Dataset::from_counts(self.rows.len(), self.labels, counts)
    }
}

/// Draws `n` i.i.d. pairs from ρ×π* on the stream identified by `seed`.
pub fn draw_dataset(
    rho: &InputDistribution,
    pi_star: &ConditionalDensity,
    n: u64,
    seed: RngSeed,
) -> Result<Dataset> {
    Sampler::new(rho, pi_star)?.dataset(n, &mut seed.rng())
}

fn check_teacher(d: &Dataset, pi_star: &ConditionalDensity) -> Result<()> {
    if d.inputs() != pi_star.inputs() || d.labels() != pi_star.labels() {
        return Err(Error::DimensionMismatch {
            context: "teacher vs dataset",
            expected: d.inputs() * d.labels(),
            found: pi_star.inputs() * pi_star.labels(),
        });
    }
    Ok(())
}

/// Teacher probabilities of every sampled pair.
pub fn derive_partial(d: &Dataset, pi_star: &ConditionalDensity) -> Result<TransferData> {
    check_teacher(d, pi_star)?;
    let mut entries = Vec::new();
    for (s, a) in d.support() {
        let p = pi_star.prob(s, a);
        if p <= 0.0 {
            return Err(Error::InconsistentDataset { input: s, label: a });
        }
        entries.push(((s, a), p));
    }
    TransferData::partial(d, entries)
}

/// Full teacher rows of every visited input.
pub fn derive_full(d: &Dataset, pi_star: &ConditionalDensity) -> Result<TransferData> {
    check_teacher(d, pi_star)?;
    for (s, a) in d.support() {
        if pi_star.prob(s, a) <= 0.0 {
            return Err(Error::InconsistentDataset { input: s, label: a });
        }
    }
    let rows = (0..d.inputs())
        .filter(|&s| d.is_visited(s))
        .map(|s| (s, pi_star.row(s).to_vec()));
    TransferData::soft(d, rows)
}

/// Side-information at `level` for a dataset drawn from `pi_star`.
pub fn disclose(
    level: DisclosureLevel,
    d: &Dataset,
    pi_star: &ConditionalDensity,
) -> Result<TransferData> {
    match level {
        DisclosureLevel::HardLabels => {
            check_teacher(d, pi_star)?;
            Ok(TransferData::hard(d))
        }
        DisclosureLevel::PartialSoftLabels => derive_partial(d, pi_star),
        DisclosureLevel::SoftLabels => derive_full(d, pi_star),
    }
}
