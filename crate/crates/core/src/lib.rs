//! Tabular knowledge transfer from a probabilistic teacher π*(·|s) to a
//! student, under three levels of teacher disclosure.
//!
//! * [`model`]: distributions, count-table datasets, side-information and
//!   the metrics on them (TV, conditional TV, KL, missing mass, ξ).
//! * [`sampling`]: keyed i.i.d. draws from ρ×π* and side-information.
//! * [`estimators`]: the four closed-form students.
//! * [`instances`]: the teacher/input families used for rate experiments.
//! * [`oracle`]: brute-force losses, grid search and exact risk.
//! * [`harness`]: Monte Carlo risk, sweeps and log-log rate fits.
//! * [`checks`]: oracle suites shared by the CLI and the test-suite.

pub mod checks;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};
pub use estimators::{EstimatorKind, StudentInit, UniformInit};
pub use harness::{
    estimate_risk, fit_rate, sweep, RegressionResult, RiskEstimate, RiskRow, RiskTable,
};
pub use instances::{make_instance, InstanceKind, InstanceSpec};
pub use model::{ConditionalDensity, Dataset, DisclosureLevel, InputDistribution, TransferData};
pub use sampling::RngSeed;
