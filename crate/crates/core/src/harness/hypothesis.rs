use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::JackknifeForm;
use crate::sample_space::EstimatorId;

use super::{evaluate, replication_rng, simulated_sample, ResolvedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Conclude that no outbreak has occurred.
    Reject,
    Retain,
}

impl Decision {
    fn reject_if(condition: bool) -> Self {
        if condition {
            Decision::Reject
        } else {
            Decision::Retain
        }
    }
}

/// Outcome of testing `H0: an outbreak is under way` given that every
/// scheduled test came back negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisTestResult {
    /// Estimator that produced `pi_hat` (after any fallback).
    pub estimator: EstimatorId,
    pub n: u64,
    /// Estimated probability under `H0` that all tests are negative.
    pub pi_hat: f64,
    pub variance_hat: Option<f64>,
    pub level: f64,
    /// Point rule: reject iff `pi_hat < level`.
    pub decision: Decision,
    /// Conservative rule: reject iff `pi_hat + 2 sqrt(variance_hat) < level`.
    pub conservative_decision: Decision,
    pub upper_confidence_bound: Option<f64>,
    pub notes: Vec<String>,
}

/// Simulates `n` outbreaks under `H0` and estimates the probability of the
/// event `A = {all scheduled tests negative}`.
///
/// `event_size` is `|A|`, needed only by the harmonic-mean estimator. When
/// that estimator sees no draw in `A` the inclusion-weighted estimator is
/// used instead.
pub fn run_hypothesis_test(
    resolved: &ResolvedModel,
    level: f64,
    n: u64,
    estimator: EstimatorId,
    seed: u64,
    jackknife: JackknifeForm,
    event_size: Option<u64>,
) -> Result<HypothesisTestResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level {level} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut notes = Vec::new();
    if resolved.schedule.tests.is_empty() {
        notes.push("empty schedule: all tests are trivially negative".to_string());
        return Ok(HypothesisTestResult {
            estimator,
            n,
            pi_hat: 1.0,
            variance_hat: Some(0.0),
            level,
            decision: Decision::Retain,
            conservative_decision: Decision::Retain,
            upper_confidence_bound: Some(1.0),
            notes,
        });
    }
    if estimator == EstimatorId::Pi2 && event_size.is_none() {
        return Err(Error::Config(
            "pi2 needs the size of the all-negative event".into(),
        ));
    }
    let mut rng = replication_rng(seed, 0, 0);
    let (sample, event) = simulated_sample(
        &resolved.model,
        &resolved.schedule,
        n,
        &mut rng,
        false,
        event_size,
    )?;
    let report = match evaluate(estimator, &sample, &event, jackknife) {
        Err(Error::NoInformation(why)) => {
            notes.push(format!("{estimator} undefined ({why}); fell back to pi1"));
            evaluate(EstimatorId::Pi1, &sample, &event, jackknife)?
        }
        other => other?,
    };
    notes.extend(report.notes.iter().cloned());
    let ucb = report
        .variance_estimate
        .map(|v| report.estimate + 2.0 * v.max(0.0).sqrt());
    if ucb.is_none() {
        notes.push("no variance estimate: conservative rule retains".to_string());
    }
    Ok(HypothesisTestResult {
        estimator: report.estimator,
        n,
        pi_hat: report.estimate,
        variance_hat: report.variance_estimate,
        level,
        decision: Decision::reject_if(report.estimate < level),
        conservative_decision: Decision::reject_if(ucb.is_some_and(|u| u < level)),
        upper_confidence_bound: ucb,
        notes,
    })
}
