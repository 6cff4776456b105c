//! Distributions, samples, side-information and the metrics defined on them.

mod dataset;
mod distribution;
mod metrics;

pub use dataset::{Dataset, DisclosureLevel, TransferData};
pub use distribution::{
    ConditionalDensity, InputDistribution, RiskSample, NORMALIZATION_TOLERANCE,
};
pub use metrics::{cond_tv, expected_missing_mass, kl, missing_mass, tv, xi};
