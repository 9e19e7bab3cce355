use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    est_sum_p2qn, mu1, mu1_variance, pi0, pi0_max, pi1, pi1_combined, pi1_cv, pi1_dual, pi2,
    v1_equal_mass, v1_exact, v1_hat, EqualMassSpec, MeanProblem,
};
use crate::importance::{pi0_is, pi1_is, pi2_is, v1_is_exact, v1_is_hat, ISSample};
use crate::oracle::{estimator_moments, exact_pi, EnumerationBudget, Moments, OracleRecord};
use crate::sample_space::{DiscreteDistribution, Event, OutcomeId, ProbabilitySample};

/// Absolute tolerance for every asserted cell.
pub const SUITE_TOLERANCE: f64 = 1e-12;

/// Six weight vectors for each of `|Ω| = 2, 3, 4`.
pub const CATALOG: [&[f64]; 18] = [
    &[0.5, 0.5],
    &[0.7, 0.3],
    &[0.9, 0.1],
    &[0.99, 0.01],
    &[0.6, 0.4],
    &[0.2, 0.8],
    &[0.5, 0.3, 0.2],
    &[0.4, 0.4, 0.2],
    &[0.8, 0.1, 0.1],
    &[0.6, 0.3, 0.1],
    &[0.98, 0.01, 0.01],
    &[0.25, 0.25, 0.5],
    &[0.25, 0.25, 0.25, 0.25],
    &[0.1, 0.2, 0.3, 0.4],
    &[0.7, 0.1, 0.1, 0.1],
    &[0.4, 0.3, 0.2, 0.1],
    &[0.97, 0.01, 0.01, 0.01],
    &[0.5, 0.25, 0.125, 0.125],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// Measured and recorded; no claim of exactness is made.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCell {
    pub claim: String,
    pub weights: Vec<f64>,
    pub event: Vec<u64>,
    /// Name of the sampling distribution for importance-sampling cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    pub status: CellStatus,
    pub record: OracleRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleSuiteReport {
    pub tolerance: f64,
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
    pub cells: Vec<OracleCell>,
}

impl OracleSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn cells_for<'a>(&'a self, claim: &'a str) -> impl Iterator<Item = &'a OracleCell> + 'a {
        self.cells.iter().filter(move |c| c.claim == claim)
    }
}

/// Which quantity of the enumerated moments a claim is about.
#[derive(Clone, Copy)]
enum Quantity {
    Mean,
    Variance,
    Bias,
}

struct Context<'a> {
    dist: &'a DiscreteDistribution,
    event: &'a Event,
    weights: &'a [f64],
    n: u64,
    budget: &'a EnumerationBudget,
    cells: Vec<OracleCell>,
}

impl Context<'_> {
    #[allow(clippy::too_many_arguments)]
    fn cell<F>(
        &mut self,
        claim: &str,
        sampling: Option<(&str, &DiscreteDistribution)>,
        quantity: Quantity,
        expected: Option<f64>,
        note: Option<&str>,
        estimator: F,
    ) -> Result<()>
    where
        F: Fn(&ProbabilitySample, &Event) -> Result<f64> + Sync,
    {
        let m: Moments = estimator_moments(
            self.dist,
            sampling.map(|s| s.1),
            self.event,
            self.n,
            self.budget,
            estimator,
        )?;
        let measured = match quantity {
            Quantity::Mean => m.mean,
            Quantity::Variance => m.variance,
            Quantity::Bias => m.bias,
        };
        let discrepancy = expected.map(|e| (measured - e).abs());
        let status = match (discrepancy, note) {
            (Some(_), Some(_)) | (None, _) => CellStatus::Report,
            (Some(d), None) if d < SUITE_TOLERANCE => CellStatus::Pass,
            _ => CellStatus::Fail,
        };
        self.cells.push(OracleCell {
            claim: claim.to_string(),
            weights: self.weights.to_vec(),
            event: self.event.members().map(|id| id.0).collect(),
            sampling: sampling.map(|s| s.0.to_string()),
            n: self.n,
            expected,
            measured,
            discrepancy,
            status,
            record: m.record(claim, self.n),
            note: note.map(str::to_string),
        });
        Ok(())
    }
}

fn normalized(raw: &[f64]) -> Result<DiscreteDistribution> {
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::from_weights(&raw.iter().map(|w| w / total).collect::<Vec<_>>())
}

/// `(π, m)` when every member of the event has the same weight.
fn equal_mass(dist: &DiscreteDistribution, event: &Event) -> Option<(f64, u64)> {
    let w: Vec<f64> = event.weights_in(dist).collect();
    let first = *w.first()?;
    w.iter()
        .all(|x| x.to_bits() == first.to_bits())
        .then_some((first * w.len() as f64, w.len() as u64))
}

fn run_cells(ctx: &mut Context<'_>) -> Result<()> {
    let (dist, event, n) = (ctx.dist, ctx.event, ctx.n);
    let pi = exact_pi(dist, event);
    let v1 = v1_exact(dist, event, n);

    ctx.cell(
        "pi0_variance",
        None,
        Quantity::Variance,
        Some(pi * (1.0 - pi) / n as f64),
        None,
        |s, e| Ok(pi0(s, e)?.estimate),
    )?;
    ctx.cell(
        "pi1_unbiased",
        None,
        Quantity::Mean,
        Some(pi),
        None,
        |s, e| Ok(pi1(s, e)?.estimate),
    )?;
    ctx.cell(
        "pi1_variance",
        None,
        Quantity::Variance,
        Some(v1),
        None,
        |s, e| Ok(pi1(s, e)?.estimate),
    )?;
    ctx.cell(
        "pi1_dual_unbiased",
        None,
        Quantity::Mean,
        Some(pi),
        None,
        |s, e| Ok(pi1_dual(s, e)?.estimate),
    )?;
    let single_draw = (n == 1).then_some("no unbiased estimator exists with a single draw");
    ctx.cell(
        "v1_hat_unbiased",
        None,
        Quantity::Mean,
        Some(v1),
        single_draw,
        v1_hat,
    )?;
    let p2qn = event
        .weights_in(dist)
        .map(|p| p * p * (1.0 - p).powi(n as i32))
        .sum::<f64>();
    ctx.cell(
        "sum_p2qn_unbiased",
        None,
        Quantity::Mean,
        Some(p2qn),
        None,
        est_sum_p2qn,
    )?;
    if let Some((mass, m)) = equal_mass(dist, event) {
        let closed = v1_equal_mass(&EqualMassSpec::new(mass, m, n)?);
        ctx.cells.push(OracleCell {
            claim: "v1_equal_mass".into(),
            weights: ctx.weights.to_vec(),
            event: event.members().map(|id| id.0).collect(),
            sampling: None,
            n,
            expected: Some(v1),
            measured: closed,
            discrepancy: Some((closed - v1).abs()),
            status: if (closed - v1).abs() < SUITE_TOLERANCE {
                CellStatus::Pass
            } else {
                CellStatus::Fail
            },
            record: OracleRecord {
                estimator: "v1_equal_mass".into(),
                n,
                mean: closed,
                variance: 0.0,
                bias: closed - v1,
                defined_fraction: 1.0,
            },
            note: None,
        });
    }

    // the observable X(ω_i) = i + 1 is used for mean estimation
    let values: Vec<f64> = (1..=dist.len()).map(|i| i as f64).collect();
    for xi in [0.0, 1.0] {
        let problem = MeanProblem::from_slice(dist, &values, xi)?;
        let mu = problem.mean(dist)?;
        let claim = if xi == 0.0 {
            "mu1_unbiased_xi0"
        } else {
            "mu1_unbiased_xi1"
        };
        ctx.cell(claim, None, Quantity::Mean, Some(mu), None, |s, _| {
            Ok(mu1(s, &problem)?.estimate)
        })?;
        if xi == 1.0 {
            let exact = mu1_variance(dist, &problem, n)?;
            ctx.cell(
                "mu1_variance",
                None,
                Quantity::Variance,
                Some(exact),
                None,
                |s, _| Ok(mu1(s, &problem)?.estimate),
            )?;
        }
    }

    for (name, f) in [
        (
            "pi0_max_bias",
            pi0_max as fn(&ProbabilitySample, &Event) -> _,
        ),
        ("pi1_combined_bias", pi1_combined),
        ("pi1_cv_bias", pi1_cv),
        ("pi2_bias", pi2),
    ] {
        ctx.cell(name, None, Quantity::Bias, None, None, |s, e| {
            Ok(f(s, e)?.estimate)
        })?;
    }

    let uniform = DiscreteDistribution::from_weights(&vec![1.0 / dist.len() as f64; dist.len()])?;
    let sqrt = normalized(&dist.weights().iter().map(|w| w.sqrt()).collect::<Vec<_>>())?;
    for (label, sampling) in [("uniform", &uniform), ("sqrt", &sqrt)] {
        let s = Some((label, sampling));
        let v1_is = v1_is_exact(dist, sampling, event, n)?;
        let is = |sample: &ProbabilitySample| ISSample::new(sample.clone());
        ctx.cell(
            "pi1_is_unbiased",
            s,
            Quantity::Mean,
            Some(pi),
            None,
            |x, e| Ok(pi1_is(&is(x)?, e, None)?.estimate),
        )?;
        ctx.cell(
            "pi1_is_variance",
            s,
            Quantity::Variance,
            Some(v1_is),
            None,
            |x, e| Ok(pi1_is(&is(x)?, e, None)?.estimate),
        )?;
        ctx.cell(
            "v1_is_hat_unbiased",
            s,
            Quantity::Mean,
            Some(v1_is),
            single_draw,
            |x, e| v1_is_hat(&is(x)?, e),
        )?;
        ctx.cell("pi0_is_bias", s, Quantity::Bias, None, None, |x, e| {
            Ok(pi0_is(&is(x)?, e)?.estimate)
        })?;
        ctx.cell("pi2_is_bias", s, Quantity::Bias, None, None, |x, e| {
            Ok(pi2_is(&is(x)?, e)?.estimate)
        })?;
    }
    Ok(())
}

/// Enumerates every claim over the catalog, all nonempty proper events and
/// `n = 1..=4`. Cells whose tuple count exceeds the budget are skipped; a
/// zero budget yields an empty report.
pub fn run_oracle_suite(budget: &EnumerationBudget) -> Result<OracleSuiteReport> {
    let mut report = OracleSuiteReport {
        tolerance: SUITE_TOLERANCE,
        ..Default::default()
    };
    if budget.max_tuples() == 0 {
        return Ok(report);
    }
    for weights in CATALOG {
        let dist = DiscreteDistribution::from_weights(weights)?;
        let size = weights.len();
        for mask in 1..(1u32 << size) - 1 {
            let event = Event::new(
                (0..size as u64)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(OutcomeId),
            );
            for n in 1..=4u64 {
                if (size as u128).pow(n as u32) > budget.max_tuples() as u128 {
                    continue;
                }
                let mut ctx = Context {
                    dist: &dist,
                    event: &event,
                    weights,
                    n,
                    budget,
                    cells: Vec::new(),
                };
                run_cells(&mut ctx)?;
                report.cells.extend(ctx.cells);
            }
        }
    }
    for c in &report.cells {
        match c.status {
            CellStatus::Pass => report.passed += 1,
            CellStatus::Fail => report.failed += 1,
            CellStatus::Report => report.reported += 1,
        }
    }
    Ok(report)
}
