//! Probability-informed estimation of event probabilities and means.
//!
//! When a sampler reports the exact probability of every outcome it draws
//! (as a trajectory simulator can), the relative frequency `k/n` is no longer
//! the best use of the sample. This crate provides:
//!
//! * [`estimators`]: the relative-frequency benchmark, the inclusion-weighted
//!   estimator whose variance decays exponentially in `n`, its dual, combined
//!   and control-variate forms, mean estimation, and the harmonic-mean
//!   estimator with jackknife variance.
//! * [`importance`]: the same estimators when draws come from a sampling
//!   distribution other than the target, plus the optimal sampling design.
//! * [`epidemic`]: a discrete-time SI simulator on networks that tracks the
//!   exact probability of each realized trajectory, and the analytically
//!   solvable chain model.
//! * [`oracle`]: exhaustive enumeration of all ordered samples on small
//!   spaces, used to verify unbiasedness and variance formulas exactly.
//! * [`harness`]: seeded experiment runners behind the `probest` binary.

pub mod epidemic;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod importance;
pub(crate) mod numeric;
pub mod oracle;
pub mod sample_space;

pub use error::{Error, Result};
pub use sample_space::{
    DiscreteDistribution, Draw, EstimateReport, EstimatorId, Event, OutcomeId, ProbabilitySample,
};
