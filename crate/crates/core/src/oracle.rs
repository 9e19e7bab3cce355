//! Exhaustive enumeration oracles.
//!
//! Every ordered `n`-tuple of outcomes is visited with its exact probability,
//! so the mean and variance of any estimator are computed without sampling
//! error. Tuples are walked in mixed-radix order, split into a fixed number
//! of contiguous ranges whose compensated sums are merged in order; results
//! do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{mu1, MeanProblem};
use crate::numeric::{binomial_u128, survival_pow, CompensatedSum};
use crate::sample_space::{DiscreteDistribution, Draw, Event, OutcomeId, ProbabilitySample};

/// Hard ceiling on the number of tuples any enumeration may visit.
pub const MAX_TUPLES: u64 = 100_000_000;

const RANGES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    max_tuples: u64,
}

impl EnumerationBudget {
    pub fn new(max_tuples: u64) -> Result<Self> {
        if max_tuples > MAX_TUPLES {
            return Err(Error::Config(format!(
                "enumeration budget {max_tuples} exceeds the ceiling {MAX_TUPLES}"
            )));
        }
        Ok(Self { max_tuples })
    }

    pub fn max_tuples(&self) -> u64 {
        self.max_tuples
    }

    /// `Ok(count)` if `count` items fit in the budget.
    pub fn admit(&self, count: u128) -> Result<u64> {
        if count > self.max_tuples as u128 {
            Err(Error::BudgetExceeded {
                required: count,
                budget: self.max_tuples,
            })
        } else {
            Ok(count as u64)
        }
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_tuples: 10_000_000,
        }
    }
}

/// `π = Σ_{ω∈A} p(ω)`.
pub fn exact_pi(dist: &DiscreteDistribution, event: &Event) -> f64 {
    dist.iter()
        .filter(|(id, _)| event.contains(*id))
        .map(|(_, p)| p)
        .collect::<CompensatedSum>()
        .value()
}

/// Exact moments of an estimator over all ordered samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// Mean conditional on the estimator being defined.
    pub mean: f64,
    /// Variance conditional on the estimator being defined.
    pub variance: f64,
    /// `mean - π` for the enumerated event.
    pub bias: f64,
    /// Probability that the estimator is defined.
    pub defined_fraction: f64,
    /// Total probability of all visited tuples; 1 up to rounding.
    pub total_weight: f64,
}

/// One line of an oracle report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub estimator: String,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub bias: f64,
    pub defined_fraction: f64,
}

impl Moments {
    pub fn record(&self, estimator: impl Into<String>, n: u64) -> OracleRecord {
        OracleRecord {
            estimator: estimator.into(),
            n,
            mean: self.mean,
            variance: self.variance,
            bias: self.bias,
            defined_fraction: self.defined_fraction,
        }
    }
}

/// The sampling alphabet: outcomes with positive sampling mass, their target
/// and sampling probabilities.
struct Alphabet {
    ids: Vec<OutcomeId>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Alphabet {
    fn new(target: &DiscreteDistribution, sampling: Option<&DiscreteDistribution>) -> Result<Self> {
        let source = sampling.unwrap_or(target);
        let mut alphabet = Alphabet {
            ids: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        };
        for (id, y) in source.iter().filter(|(_, y)| *y > 0.0) {
            let x = target.weight(id).ok_or_else(|| {
                Error::InvalidDistribution(format!("sampled outcome {id} missing from target"))
            })?;
            alphabet.ids.push(id);
            alphabet.x.push(x);
            alphabet.y.push(y);
        }
        if alphabet.ids.is_empty() {
            return Err(Error::InvalidDistribution(
                "no outcome can be sampled".into(),
            ));
        }
        Ok(alphabet)
    }

    fn tuple_count(&self, n: u64, budget: &EnumerationBudget) -> Result<u64> {
        let m = self.ids.len() as u128;
        let mut count: u128 = 1;
        for _ in 0..n {
            count = count.saturating_mul(m);
            if count > budget.max_tuples() as u128 {
                break;
            }
        }
        budget.admit(count)
    }
}

/// Per-range accumulators.
#[derive(Default, Clone, Copy)]
struct Partial {
    total: CompensatedSum,
    defined: CompensatedSum,
    first: CompensatedSum,
}

/// Visits tuples `start..end` (in mixed radix, last draw fastest), calling
/// `visit(weight, value)` for each tuple where the estimator is defined.
fn walk_range<F>(
    alphabet: &Alphabet,
    n: usize,
    event: &Event,
    start: u64,
    end: u64,
    estimator: &F,
    mut visit: impl FnMut(f64, Option<f64>),
) -> Result<()>
where
    F: Fn(&ProbabilitySample, &Event) -> Result<f64>,
{
    let m = alphabet.ids.len() as u64;
    let mut digits = vec![0usize; n];
    let mut rest = start;
    for d in digits.iter_mut().rev() {
        *d = (rest % m) as usize;
        rest /= m;
    }
    for _ in start..end {
        let weight: f64 = digits.iter().map(|&i| alphabet.y[i]).product();
        let draws = digits
            .iter()
            .map(|&i| Draw::with_sampling(alphabet.ids[i], alphabet.x[i], alphabet.y[i]))
            .collect();
        let sample = ProbabilitySample::new(draws)?;
        match estimator(&sample, event) {
            Ok(v) => visit(weight, Some(v)),
            Err(Error::NoInformation(_)) => visit(weight, None),
            Err(e) => return Err(e),
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < m as usize {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

fn ranges(total: u64) -> Vec<(u64, u64)> {
    let chunk = total.div_ceil(RANGES).max(1);
    (0..total)
        .step_by(chunk as usize)
        .map(|s| (s, (s + chunk).min(total)))
        .collect()
}

/// Exact moments of `estimator` under `n` i.i.d. draws from `sampling`
/// (defaults to `target`). Draws always carry both `x = p(ω)` and
/// `y = p'(ω)`. Tuples where the estimator reports
/// [`Error::NoInformation`] are excluded; moments are conditional on the rest.
pub fn estimator_moments<F>(
    target: &DiscreteDistribution,
    sampling: Option<&DiscreteDistribution>,
    event: &Event,
    n: u64,
    budget: &EnumerationBudget,
    estimator: F,
) -> Result<Moments>
where
    F: Fn(&ProbabilitySample, &Event) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let alphabet = Alphabet::new(target, sampling)?;
    let total = alphabet.tuple_count(n, budget)?;
    let n_draws = n as usize;
    let parts = ranges(total);

    let first_pass: Vec<Partial> = parts
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = Partial::default();
            walk_range(&alphabet, n_draws, event, s, e, &estimator, |w, v| {
                acc.total.add(w);
                if let Some(v) = v {
                    acc.defined.add(w);
                    acc.first.add(w * v);
                }
            })?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let (mut total_weight, mut defined, mut first) = (
        CompensatedSum::default(),
        CompensatedSum::default(),
        CompensatedSum::default(),
    );
    for p in &first_pass {
        total_weight.add(p.total.value());
        defined.add(p.defined.value());
        first.add(p.first.value());
    }
    let defined = defined.value();
    if defined <= 0.0 {
        return Err(Error::NoInformation(
            "estimator is undefined on every sample".into(),
        ));
    }
    let mean = first.value() / defined;

    let second_pass: Vec<f64> = parts
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = CompensatedSum::default();
            walk_range(&alphabet, n_draws, event, s, e, &estimator, |w, v| {
                if let Some(v) = v {
                    acc.add(w * (v - mean) * (v - mean));
                }
            })?;
            Ok(acc.value())
        })
        .collect::<Result<_>>()?;
    let variance = second_pass.into_iter().collect::<CompensatedSum>().value() / defined;

    let total_weight = total_weight.value();
    Ok(Moments {
        mean,
        variance,
        bias: mean - exact_pi(target, event),
        defined_fraction: defined / total_weight,
        total_weight,
    })
}

/// Exact `Var(μ̂₁)` at the shift `xi`.
pub fn variance_of_mu1_at_xi(
    dist: &DiscreteDistribution,
    problem: &MeanProblem,
    n: u64,
    xi: f64,
    budget: &EnumerationBudget,
) -> Result<f64> {
    let shifted = problem.with_xi(xi);
    let everything = Event::new(dist.outcomes().iter().copied());
    let m = estimator_moments(dist, None, &everything, n, budget, |s, _| {
        Ok(mu1(s, &shifted)?.estimate)
    })?;
    Ok(m.variance)
}

/// Best design found on the step grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    /// `(outcome, p')` over the event members, by outcome id.
    pub design: Vec<(OutcomeId, f64)>,
    pub objective: f64,
    pub grid_points: u64,
}

/// Minimizes `Σ_A p² (1 - p')^n` over all `p'` on `A` whose entries are
/// multiples of `step` summing to one.
pub fn simplex_grid_search(
    dist: &DiscreteDistribution,
    event: &Event,
    n: u64,
    step: f64,
    budget: &EnumerationBudget,
) -> Result<GridSearchResult> {
    let members: Vec<(OutcomeId, f64)> = event
        .members()
        .filter_map(|id| dist.weight(id).map(|p| (id, p)))
        .collect();
    if members.is_empty() {
        return Err(Error::InvalidEvent(
            "grid search needs a nonempty event".into(),
        ));
    }
    let units = (1.0 / step).round();
    if step.is_nan() || step <= 0.0 || (units * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("grid step {step} does not divide 1")));
    }
    let units = units as usize;
    let k = members.len();
    let grid_points = budget.admit(binomial_u128((units + k - 1) as u64, (k - 1) as u64))?;

    // table[i][u] = p_i² (1 - u/units)^n
    let table: Vec<Vec<f64>> = members
        .iter()
        .map(|&(_, p)| {
            (0..=units)
                .map(|u| p * p * survival_pow(u as f64 / units as f64, n))
                .collect()
        })
        .collect();

    struct Search<'a> {
        table: &'a [Vec<f64>],
        current: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, remaining: usize, partial: f64) {
            let last = self.table.len() - 1;
            if i == last {
                self.current[i] = remaining;
                let value = partial + self.table[i][remaining];
                if value < self.best_value {
                    self.best_value = value;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for u in 0..=remaining {
                self.current[i] = u;
                self.go(i + 1, remaining - u, partial + self.table[i][u]);
            }
        }
    }
    let mut search = Search {
        table: &table,
        current: vec![0; k],
        best: vec![0; k],
        best_value: f64::INFINITY,
    };
    search.go(0, units, 0.0);

    Ok(GridSearchResult {
        design: members
            .iter()
            .zip(&search.best)
            .map(|(&(id, _), &u)| (id, u as f64 / units as f64))
            .collect(),
        objective: search.best_value,
        grid_points,
    })
}
