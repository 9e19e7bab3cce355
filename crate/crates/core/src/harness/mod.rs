//! Seeded experiment runners and their reports.
//!
//! Replication `r` of grid point `g` draws from a ChaCha8 generator seeded
//! with the master seed and switched to stream `(g << 40) | r`, so results do
//! not depend on how replications are scheduled across threads.

mod compare;
mod config;
mod hypothesis;
mod reports;
mod suite;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::epidemic::{detect, simulate, SIModel, SentinelSchedule, Trajectory};
use crate::error::{Error, Result};
use crate::estimators::{
    pi0, pi0_max, pi1, pi1_combined, pi1_cv, pi1_dual, pi2_with, JackknifeForm,
};
use crate::sample_space::{Draw, EstimateReport, EstimatorId, Event, OutcomeId, ProbabilitySample};

pub use compare::{run_compare, write_compare_csv, CompareRow};
pub use config::{ChainSpec, ExperimentConfig, ModelSpec, NetworkSpec, ResolvedModel};
pub use hypothesis::{run_hypothesis_test, Decision, HypothesisTestResult};
pub use reports::{
    chain_report, chain_sweep, design_report, ChainReport, DesignReport, SweepPoint, SWEEP_P1,
    SWEEP_P2,
};
pub use suite::{run_oracle_suite, CellStatus, OracleCell, OracleSuiteReport};

/// Generator for replication `rep` of grid point `grid`.
pub fn replication_rng(seed: u64, grid: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((grid << 40) | rep);
    rng
}

/// Estimators that work on plain simulated samples.
pub fn supports_simulation(id: EstimatorId) -> bool {
    !matches!(
        id,
        EstimatorId::Mu1 | EstimatorId::Pi0Is | EstimatorId::Pi1Is | EstimatorId::Pi2Is
    )
}

/// Evaluates a plain (non-importance, event-probability) estimator.
pub fn evaluate(
    id: EstimatorId,
    sample: &ProbabilitySample,
    event: &Event,
    jackknife: JackknifeForm,
) -> Result<EstimateReport> {
    match id {
        EstimatorId::Pi0 => pi0(sample, event),
        EstimatorId::Pi0Max => pi0_max(sample, event),
        EstimatorId::Pi1 => pi1(sample, event),
        EstimatorId::Pi1Dual => pi1_dual(sample, event),
        EstimatorId::Pi1Combined => pi1_combined(sample, event),
        EstimatorId::Pi1Cv => pi1_cv(sample, event),
        EstimatorId::Pi2 => pi2_with(sample, event, jackknife),
        other => Err(Error::Config(format!(
            "{other} needs a sampling distribution or an observable and cannot run on simulated data"
        ))),
    }
}

/// `n` simulated trajectories as a probability sample, plus the event
/// `{detected}` (or its complement) listing the observed members.
pub(crate) fn simulated_sample(
    model: &SIModel,
    schedule: &SentinelSchedule,
    n: u64,
    rng: &mut ChaCha8Rng,
    detected: bool,
    event_size: Option<u64>,
) -> Result<(ProbabilitySample, Event)> {
    let mut draws = Vec::with_capacity(n as usize);
    let mut members: Vec<OutcomeId> = Vec::new();
    for _ in 0..n {
        let t: Trajectory = simulate(model, rng);
        let id = t.outcome_id();
        if detect(&t, schedule) == detected {
            members.push(id);
        }
        draws.push(Draw::new(id, t.probability()));
    }
    let sample = ProbabilitySample::new(draws)?;
    let event = match event_size {
        Some(m) => Event::with_cardinality(members, m)?,
        None => Event::new(members),
    };
    Ok((sample, event))
}
