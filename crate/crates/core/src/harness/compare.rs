use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{v0_exact, v1_exact_classes, ProbabilityClass};
use crate::numeric::CompensatedSum;
use crate::sample_space::EstimatorId;

use super::{evaluate, replication_rng, simulated_sample, ExperimentConfig, ResolvedModel};

/// One `(estimator, n)` line of the comparison report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub estimator: EstimatorId,
    pub n: u64,
    /// Replications where the estimator was defined.
    pub rep_count: u64,
    pub pi_true: Option<f64>,
    pub est_mean: Option<f64>,
    pub est_var_empirical: Option<f64>,
    pub var_exact: Option<f64>,
    pub var_estimate_mean: Option<f64>,
    /// Whether the empirical variance lies within five standard errors of
    /// `var_exact`, when both exist.
    #[serde(skip)]
    pub within_5se: Option<bool>,
}

fn class_mass(classes: &[ProbabilityClass]) -> f64 {
    classes
        .iter()
        .map(|c| c.weight * c.count as f64)
        .collect::<CompensatedSum>()
        .value()
}

fn class_count(classes: &[ProbabilityClass]) -> u64 {
    classes.iter().map(|c| c.count).sum()
}

/// One estimator's `(estimate, variance estimate)` in one replication.
type Cell = (f64, Option<f64>);

struct Reference {
    pi: Option<f64>,
    event_size: Option<u64>,
    classes: Option<(Vec<ProbabilityClass>, Vec<ProbabilityClass>)>,
}

fn reference(config: &ExperimentConfig, resolved: &ResolvedModel) -> Result<Reference> {
    let classes = resolved.detection_classes(config.enumeration_budget)?;
    if let Some((hit, _)) = &classes {
        return Ok(Reference {
            pi: Some(class_mass(hit)),
            event_size: config.event_size.or(Some(class_count(hit))),
            classes,
        });
    }
    let pi = match config.pilot_reps {
        Some(reps) if reps > 0 => {
            let mut rng = replication_rng(config.seed, u64::from(u32::MAX), 0);
            let (sample, event) = simulated_sample(
                &resolved.model,
                &resolved.schedule,
                reps,
                &mut rng,
                true,
                None,
            )?;
            Some(sample.count_in(&event) as f64 / reps as f64)
        }
        _ => None,
    };
    Ok(Reference {
        pi,
        event_size: config.event_size,
        classes: None,
    })
}

fn exact_variance(id: EstimatorId, n: u64, reference: &Reference) -> Option<f64> {
    match id {
        EstimatorId::Pi0 => reference.pi.map(|pi| v0_exact(pi, n)),
        EstimatorId::Pi1 => reference
            .classes
            .as_ref()
            .map(|(hit, _)| v1_exact_classes(hit, n)),
        EstimatorId::Pi1Dual => reference
            .classes
            .as_ref()
            .map(|(_, miss)| v1_exact_classes(miss, n)),
        _ => None,
    }
}

/// Mean and unbiased sample variance with a standard error for the latter.
fn summarize(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let r = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / r;
    if values.len() < 2 {
        return (Some(mean), None, None);
    }
    let m2 = values
        .iter()
        .map(|v| (v - mean).powi(2))
        .collect::<CompensatedSum>()
        .value();
    let m4 = values
        .iter()
        .map(|v| (v - mean).powi(4))
        .collect::<CompensatedSum>()
        .value()
        / r;
    let var = m2 / (r - 1.0);
    let biased = m2 / r;
    let se = ((m4 - biased * biased).max(0.0) / r).sqrt();
    (Some(mean), Some(var), Some(se))
}

/// Runs every `(estimator, n)` cell of the config over `reps` seeded
/// replications. Rows come out in config order: estimators outer, `n` inner.
pub fn run_compare(config: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    config.validate()?;
    let resolved = config.resolve_model()?;
    let reference = reference(config, &resolved)?;
    if config.estimators.contains(&EstimatorId::Pi2) && reference.event_size.is_none() {
        return Err(Error::Config(
            "pi2 needs the event size; set `event_size` in the config".into(),
        ));
    }
    let k = config.estimators.len();

    let mut per_grid = Vec::with_capacity(config.n_grid.len());
    for (g, &n) in config.n_grid.iter().enumerate() {
        let reps: Vec<Vec<Option<Cell>>> = (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = replication_rng(config.seed, g as u64, r);
                let (sample, event) = simulated_sample(
                    &resolved.model,
                    &resolved.schedule,
                    n,
                    &mut rng,
                    true,
                    reference.event_size,
                )?;
                config
                    .estimators
                    .iter()
                    .map(
                        |&id| match evaluate(id, &sample, &event, config.jackknife) {
                            Ok(rep) => Ok(Some((rep.estimate, rep.variance_estimate))),
                            Err(Error::NoInformation(_)) => Ok(None),
                            Err(e) => Err(e),
                        },
                    )
                    .collect()
            })
            .collect::<Result<_>>()?;
        per_grid.push(reps);
    }

    let mut rows = Vec::with_capacity(k * config.n_grid.len());
    for (e, &id) in config.estimators.iter().enumerate() {
        for (g, &n) in config.n_grid.iter().enumerate() {
            let values: Vec<(f64, Option<f64>)> =
                per_grid[g].iter().filter_map(|rep| rep[e]).collect();
            let estimates: Vec<f64> = values.iter().map(|v| v.0).collect();
            let var_estimates: Vec<f64> = values.iter().filter_map(|v| v.1).collect();
            let (est_mean, est_var, se) = summarize(&estimates);
            let var_exact = exact_variance(id, n, &reference);
            let within_5se = match (est_var, se, var_exact) {
                (Some(v), Some(se), Some(x)) => Some((v - x).abs() <= 5.0 * se),
                _ => None,
            };
            rows.push(CompareRow {
                estimator: id,
                n,
                rep_count: estimates.len() as u64,
                pi_true: reference.pi,
                est_mean,
                est_var_empirical: est_var,
                var_exact,
                var_estimate_mean: summarize(&var_estimates).0,
                within_5se,
            });
        }
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the rows as CSV; missing values are empty cells.
pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "estimator",
        "n",
        "rep_count",
        "pi_true",
        "est_mean",
        "est_var_empirical",
        "var_exact",
        "var_estimate_mean",
    ])?;
    for r in rows {
        w.write_record([
            r.estimator.name().to_string(),
            r.n.to_string(),
            r.rep_count.to_string(),
            cell(r.pi_true),
            cell(r.est_mean),
            cell(r.est_var_empirical),
            cell(r.var_exact),
            cell(r.var_estimate_mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}
