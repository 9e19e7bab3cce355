//! Estimators of `π = P(A)` and of means for samples drawn from the target
//! distribution itself.
//!
//! The inclusion-weighted family (`pi1` and relatives) divides each distinct
//! observed outcome's probability by its inclusion probability `1 - q(ω)^n`,
//! a Horvitz–Thompson construction. Its variance decays like
//! `(1 - min p)^n` instead of `1/n`. The harmonic-mean estimator `pi2` instead
//! uses every draw in the event and needs the cardinality `m = |A|`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    compensated_sum, inclusion_prob, pair_covariance, signed_pow, survival_pow, CompensatedSum,
};
use crate::sample_space::{
    DiscreteDistribution, Draw, EstimateReport, EstimatorId, Event, OutcomeId, ProbabilitySample,
};

/// Outcomes sharing a target weight and a sampling probability.
///
/// Large outcome spaces (e.g. all chain trajectories in an event) often have
/// few distinct probabilities; the exact variance then costs
/// `O(classes²)` instead of `O(m²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityClass {
    /// Target probability `p(ω)` of each member.
    pub weight: f64,
    /// Sampling probability `p'(ω)`; equal to `weight` without importance sampling.
    pub sampling: f64,
    pub count: u64,
}

impl ProbabilityClass {
    pub fn plain(p: f64, count: u64) -> Self {
        Self {
            weight: p,
            sampling: p,
            count,
        }
    }
}

/// Groups `(weight, sampling)` pairs by exact bit pattern.
pub(crate) fn group_classes<I>(pairs: I) -> Vec<ProbabilityClass>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut grouped: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for (w, s) in pairs {
        *grouped.entry((w.to_bits(), s.to_bits())).or_default() += 1;
    }
    grouped
        .into_iter()
        .map(|((w, s), count)| ProbabilityClass {
            weight: f64::from_bits(w),
            sampling: f64::from_bits(s),
            count,
        })
        .collect()
}

/// Exact variance of `Σ_{ω∈O∩A} w(ω) / (1 - q'(ω)^n)` over the classes.
///
/// Outcomes with zero sampling probability are never observed and contribute
/// nothing.
pub(crate) fn ht_variance(classes: &[ProbabilityClass], n: u64) -> f64 {
    let active: Vec<&ProbabilityClass> = classes
        .iter()
        .filter(|c| c.sampling > 0.0 && c.count > 0)
        .collect();
    let incl: Vec<f64> = active
        .iter()
        .map(|c| inclusion_prob(c.sampling, n))
        .collect();
    let mut acc = CompensatedSum::default();
    for (i, ci) in active.iter().enumerate() {
        for (j, cj) in active.iter().enumerate() {
            let pairs = if i == j {
                ci.count as f64 * (ci.count as f64 - 1.0)
            } else {
                ci.count as f64 * cj.count as f64
            };
            if pairs == 0.0 {
                continue;
            }
            let cov = pair_covariance(ci.sampling, cj.sampling, n);
            acc.add(pairs * ci.weight * cj.weight * cov / (incl[i] * incl[j]));
        }
        acc.add(ci.count as f64 * ci.weight * ci.weight * survival_pow(ci.sampling, n) / incl[i]);
    }
    acc.value()
}

/// Unbiased estimate of [`ht_variance`] from the distinct observed outcomes,
/// given as `(weight, sampling probability)`.
pub(crate) fn ht_variance_hat(observed: &[(f64, f64)], n: u64) -> f64 {
    let incl: Vec<f64> = observed
        .iter()
        .map(|&(_, s)| inclusion_prob(s, n))
        .collect();
    let mut acc = CompensatedSum::default();
    for (i, &(wi, si)) in observed.iter().enumerate() {
        for (j, &(wj, sj)) in observed.iter().enumerate() {
            if i == j {
                continue;
            }
            let cov = pair_covariance(si, sj, n);
            let joint = incl[i] * incl[j] + cov;
            acc.add(wi * wj * cov / (incl[i] * incl[j] * joint));
        }
        acc.add(wi * wi * survival_pow(si, n) / (incl[i] * incl[i]));
    }
    acc.value()
}

fn require_nonempty(sample: &ProbabilitySample) -> Result<u64> {
    if sample.is_empty() {
        Err(Error::EmptySample)
    } else {
        Ok(sample.len() as u64)
    }
}

fn observed_in(sample: &ProbabilitySample, event: &Event, inside: bool) -> Result<Vec<Draw>> {
    Ok(sample
        .observed_set()?
        .into_iter()
        .filter(|d| event.contains(d.outcome) == inside)
        .collect())
}

/// `Σ x / (1 - (1 - x)^n)` over the given distinct outcomes.
fn inclusion_weighted_sum(observed: &[Draw], n: u64) -> f64 {
    compensated_sum(observed.iter().map(|d| d.x / inclusion_prob(d.x, n)))
}

fn plain_terms(observed: &[Draw]) -> Vec<(f64, f64)> {
    observed.iter().map(|d| (d.x, d.x)).collect()
}

/// Relative frequency `k/n` with plug-in variance `π̂₀(1 - π̂₀)/n`.
pub fn pi0(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)? as usize;
    let k = sample.count_in(event);
    let est = k as f64 / n as f64;
    Ok(
        EstimateReport::new(EstimatorId::Pi0, est, n, k)
            .with_variance(est * (1.0 - est) / n as f64),
    )
}

/// `v₀ = π(1 - π)/n`.
pub fn v0_exact(pi: f64, n: u64) -> f64 {
    pi * (1.0 - pi) / n as f64
}

/// `max(k/n, Σ_{ω∈O∩A} p(ω))`. Biased.
pub fn pi0_max(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)? as usize;
    let k = sample.count_in(event);
    let observed_mass = compensated_sum(observed_in(sample, event, true)?.iter().map(|d| d.x));
    let est = (k as f64 / n as f64).max(observed_mass);
    Ok(EstimateReport::new(EstimatorId::Pi0Max, est, n, k)
        .note("not unbiased: the max of two unbiased-or-lower quantities is biased upward"))
}

/// Inclusion-weighted estimator `π̂₁ = Σ_{ω∈O∩A} p(ω) / (1 - q(ω)^n)`.
///
/// `n` in the exponent is the full sample size, not `k`. The attached variance
/// estimate is [`v1_hat`] and can be negative.
pub fn pi1(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)?;
    let k = sample.count_in(event);
    let observed = observed_in(sample, event, true)?;
    let est = inclusion_weighted_sum(&observed, n);
    let var = ht_variance_hat(&plain_terms(&observed), n);
    Ok(EstimateReport::new(EstimatorId::Pi1, est, n as usize, k).with_variance(var))
}

/// Exact variance `v₁` of [`pi1`] for samples of size `n` from `dist`.
pub fn v1_exact(dist: &DiscreteDistribution, event: &Event, n: u64) -> f64 {
    let classes = group_classes(event.weights_in(dist).map(|p| (p, p)));
    ht_variance(&classes, n)
}

/// [`v1_exact`] for an event described only by its probability classes.
pub fn v1_exact_classes(classes: &[ProbabilityClass], n: u64) -> f64 {
    ht_variance(classes, n)
}

/// Large-`n` approximation of `v₁` and its exponentially decaying upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBound {
    /// `Σ_{ω,ω'∈A} p p' [1 - p - p']^n + Σ_{ω∈A} p² q^n`.
    pub approx: f64,
    /// `m² p̄² (1 - 2p̲)^n + m p̄² (1 - p̲)^n`.
    pub bound: f64,
    pub p_min: f64,
    pub p_max: f64,
}

pub fn v1_asymptotic_bound(
    dist: &DiscreteDistribution,
    event: &Event,
    n: u64,
) -> Result<AsymptoticBound> {
    let weights: Vec<f64> = event.weights_in(dist).collect();
    if weights.is_empty() {
        return Err(Error::InvalidEvent(
            "asymptotic bound needs a nonempty event".into(),
        ));
    }
    let classes = group_classes(weights.iter().map(|&p| (p, p)));
    let mut acc = CompensatedSum::default();
    for a in &classes {
        for b in &classes {
            let pairs = a.count as f64 * b.count as f64;
            acc.add(pairs * a.weight * b.weight * signed_pow(1.0 - a.weight - b.weight, n));
        }
        acc.add(a.count as f64 * a.weight * a.weight * survival_pow(a.weight, n));
    }
    let p_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let p_max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = weights.len() as f64;
    let bound = m * m * p_max * p_max * signed_pow(1.0 - 2.0 * p_min, n)
        + m * p_max * p_max * survival_pow(p_min, n);
    Ok(AsymptoticBound {
        approx: acc.value(),
        bound,
        p_min,
        p_max,
    })
}

/// Mass `π` spread equally over `m` outcomes, sampled `n` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualMassSpec {
    pub pi: f64,
    pub m: u64,
    pub n: u64,
}

impl EqualMassSpec {
    pub fn new(pi: f64, m: u64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi) || m == 0 || n == 0 || pi / m as f64 > 1.0 {
            return Err(Error::Config(format!(
                "equal-mass spec needs π in [0,1], m ≥ 1, n ≥ 1 (got π={pi}, m={m}, n={n})"
            )));
        }
        Ok(Self { pi, m, n })
    }
}

/// Closed form of `v₁` when `A` holds `m` outcomes of mass `π/m` each:
/// `π² [(m-1)(1-2θ)^n - m(1-θ)^{2n} + (1-θ)^n] / (m (1-(1-θ)^n)²)` with
/// `θ = π/m`, evaluated with the numerator regrouped as
/// `(m-1)[(1-2θ)^n - (1-θ)^{2n}] + (1-θ)^n [1 - (1-θ)^n]`.
pub fn v1_equal_mass(spec: &EqualMassSpec) -> f64 {
    let EqualMassSpec { pi, m, n } = *spec;
    if pi == 0.0 {
        return 0.0;
    }
    let theta = pi / m as f64;
    let q_n = survival_pow(theta, n);
    let incl = inclusion_prob(theta, n);
    let numerator = (m as f64 - 1.0) * pair_covariance(theta, theta, n) + q_n * incl;
    pi * pi * numerator / (m as f64 * incl * incl)
}

/// Unbiased estimator `Σ_{ω∈A∩O} p² q^n / (1 - q^n)` of `Σ_{ω∈A} p² q^n`.
pub fn est_sum_p2qn(sample: &ProbabilitySample, event: &Event) -> Result<f64> {
    let n = require_nonempty(sample)?;
    let observed = observed_in(sample, event, true)?;
    Ok(compensated_sum(observed.iter().map(|d| {
        d.x * d.x * survival_pow(d.x, n) / inclusion_prob(d.x, n)
    })))
}

/// Unbiased estimator `v̂₁` of `v₁`; not sign-constrained.
///
/// Distinct observed pairs contribute `p p' [1/(π_ω π_ω') - 1/π_ωω']` with
/// `π_ωω'` the joint inclusion probability; each observed outcome contributes
/// `p² q^n / (1 - q^n)²`.
pub fn v1_hat(sample: &ProbabilitySample, event: &Event) -> Result<f64> {
    let n = require_nonempty(sample)?;
    let observed = observed_in(sample, event, true)?;
    Ok(ht_variance_hat(&plain_terms(&observed), n))
}

/// Dual estimator `1 - Σ_{ω∈O∖A} p(ω) / (1 - q(ω)^n)`, built from the
/// complement; its variance estimate is `v̂₁` computed over `O ∖ A`.
pub fn pi1_dual(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)?;
    let k = sample.count_in(event);
    let outside = observed_in(sample, event, false)?;
    let est = 1.0 - inclusion_weighted_sum(&outside, n);
    let var = ht_variance_hat(&plain_terms(&outside), n);
    Ok(EstimateReport::new(EstimatorId::Pi1Dual, est, n as usize, k).with_variance(var))
}

/// Inverse-variance weighted combination of `π̂₀`, `π̂₁` and the dual.
///
/// A component whose variance estimate is non-finite or `≤ 0` is left out.
/// With no usable component the result falls back to `π̂₁`. The attached
/// variance `1 / Σ 1/v̂` treats the components as independent.
pub fn pi1_combined(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let parts = [
        pi0(sample, event)?,
        pi1(sample, event)?,
        pi1_dual(sample, event)?,
    ];
    let n = parts[0].n;
    let k = parts[0].k;
    let usable: Vec<(f64, f64, EstimatorId)> = parts
        .iter()
        .filter_map(|r| {
            r.variance_estimate
                .filter(|v| v.is_finite() && *v > 0.0)
                .map(|v| (r.estimate, v, r.estimator))
        })
        .collect();
    if usable.is_empty() {
        return Ok(EstimateReport {
            estimator: EstimatorId::Pi1Combined,
            ..parts[1].clone()
        }
        .note("all component variance estimates degenerate; fell back to pi1"));
    }
    let pairs: Vec<(f64, f64)> = usable.iter().map(|&(e, v, _)| (e, v)).collect();
    let (estimate, variance) = inverse_variance_mean(&pairs);
    let mut report =
        EstimateReport::new(EstimatorId::Pi1Combined, estimate, n, k).with_variance(variance);
    for r in &parts {
        if !usable.iter().any(|u| u.2 == r.estimator) {
            report = report.note(format!(
                "{} excluded: degenerate variance estimate",
                r.estimator
            ));
        }
    }
    Ok(report)
}

/// `(Σ eᵢ/vᵢ / Σ 1/vᵢ, 1 / Σ 1/vᵢ)` for `(estimate, variance)` pairs.
fn inverse_variance_mean(parts: &[(f64, f64)]) -> (f64, f64) {
    let precision = compensated_sum(parts.iter().map(|(_, v)| 1.0 / v));
    let weighted = compensated_sum(parts.iter().map(|(e, v)| e / v));
    (weighted / precision, 1.0 / precision)
}

/// Observable `X` on the outcomes plus the reference point `ξ` of the
/// shifted mean estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanProblem {
    pub values: HashMap<OutcomeId, f64>,
    pub xi: f64,
}

impl MeanProblem {
    pub fn new<I: IntoIterator<Item = (OutcomeId, f64)>>(values: I, xi: f64) -> Self {
        Self {
            values: values.into_iter().collect(),
            xi,
        }
    }

    /// Values listed in the order of `dist`'s outcomes.
    pub fn from_slice(dist: &DiscreteDistribution, values: &[f64], xi: f64) -> Result<Self> {
        if values.len() != dist.len() {
            return Err(Error::Config(format!(
                "{} values for {} outcomes",
                values.len(),
                dist.len()
            )));
        }
        Ok(Self::new(
            dist.outcomes().iter().copied().zip(values.iter().copied()),
            xi,
        ))
    }

    pub fn with_xi(&self, xi: f64) -> Self {
        Self {
            values: self.values.clone(),
            xi,
        }
    }

    pub fn value(&self, id: OutcomeId) -> Result<f64> {
        self.values
            .get(&id)
            .copied()
            .ok_or(Error::MissingValue(id.0))
    }

    /// `μ = Σ p(ω) X(ω)`.
    pub fn mean(&self, dist: &DiscreteDistribution) -> Result<f64> {
        let terms = dist
            .iter()
            .map(|(id, p)| self.value(id).map(|x| p * x))
            .collect::<Result<Vec<_>>>()?;
        Ok(compensated_sum(terms))
    }
}

/// `μ̂ = ξ + Σ_{ω∈O} p(ω)(X(ω) - ξ) / (1 - q(ω)^n)`, unbiased for every fixed `ξ`.
pub fn mu1(sample: &ProbabilitySample, problem: &MeanProblem) -> Result<EstimateReport> {
    let n = require_nonempty(sample)?;
    let observed = sample.observed_set()?;
    let xi = problem.xi;
    let mut acc = CompensatedSum::default();
    let mut terms = Vec::with_capacity(observed.len());
    for d in &observed {
        let shifted = d.x * (problem.value(d.outcome)? - xi);
        acc.add(shifted / inclusion_prob(d.x, n));
        terms.push((shifted, d.x));
    }
    let var = ht_variance_hat(&terms, n);
    Ok(
        EstimateReport::new(EstimatorId::Mu1, xi + acc.value(), n as usize, n as usize)
            .with_variance(var),
    )
}

/// Coefficients of `Var(μ̂)(ξ) = a - 2bξ + cξ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MeanVarianceQuadratic {
    a: f64,
    b: f64,
    c: f64,
}

fn mean_variance_quadratic(
    dist: &DiscreteDistribution,
    problem: &MeanProblem,
    n: u64,
) -> Result<MeanVarianceQuadratic> {
    let pts: Vec<(f64, f64)> = dist
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(id, p)| problem.value(id).map(|x| (p, x)))
        .collect::<Result<_>>()?;
    let incl: Vec<f64> = pts.iter().map(|&(p, _)| inclusion_prob(p, n)).collect();
    let (mut a, mut b, mut c) = (
        CompensatedSum::default(),
        CompensatedSum::default(),
        CompensatedSum::default(),
    );
    for (i, &(pi, xi)) in pts.iter().enumerate() {
        for (j, &(pj, xj)) in pts.iter().enumerate() {
            let m = if i == j {
                survival_pow(pi, n) / incl[i]
            } else {
                pair_covariance(pi, pj, n) / (incl[i] * incl[j])
            };
            let w = pi * pj * m;
            a.add(w * xi * xj);
            b.add(w * xi);
            c.add(w);
        }
    }
    Ok(MeanVarianceQuadratic {
        a: a.value(),
        b: b.value(),
        c: c.value(),
    })
}

/// Exact variance of [`mu1`] at the problem's reference point.
pub fn mu1_variance(dist: &DiscreteDistribution, problem: &MeanProblem, n: u64) -> Result<f64> {
    let q = mean_variance_quadratic(dist, problem, n)?;
    let xi = problem.xi;
    Ok(q.a - 2.0 * q.b * xi + q.c * xi * xi)
}

/// Reference point `ξ` minimizing the variance of [`mu1`].
///
/// This is the stationary point of the quadratic `Var(μ̂)(ξ)`; written as in
/// the usual first-order condition it reads
/// `ξ = [μ - Σ_{ω,ω'} pX p' R - Σ_ω p² X D] / [1 - Σ_{ω,ω'} p p' R - Σ_ω p² D]`
/// where the single sums carry `p(ω)²`. `ξ` is not identified when every
/// outcome is observed with certainty.
pub fn optimal_xi(dist: &DiscreteDistribution, problem: &MeanProblem, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let q = mean_variance_quadratic(dist, problem, n)?;
    if !(q.c > 0.0 && q.c.is_finite()) {
        return Err(Error::Degenerate(
            "variance does not depend on the reference point".into(),
        ));
    }
    Ok(q.b / q.c)
}

/// Control-variate form `π̂₁ + [1 - Σ_{ω∈O} p/(1 - q^n)] π̂₀`.
///
/// The reference point is the data-dependent `π̂₀`, so this is not exactly
/// unbiased.
pub fn pi1_cv(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)?;
    let k = sample.count_in(event);
    let observed = sample.observed_set()?;
    let inside: Vec<Draw> = observed
        .iter()
        .copied()
        .filter(|d| event.contains(d.outcome))
        .collect();
    let pi1_est = inclusion_weighted_sum(&inside, n);
    let total = inclusion_weighted_sum(&observed, n);
    let pi0_est = k as f64 / n as f64;
    Ok(EstimateReport::new(
        EstimatorId::Pi1Cv,
        pi1_est + (1.0 - total) * pi0_est,
        n as usize,
        k,
    )
    .note("reference point estimated from the same sample; bias is not exactly zero"))
}

/// Exact leave-one-out jackknife or its large-`k` approximation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JackknifeForm {
    #[default]
    Exact,
    LargeK,
}

impl std::str::FromStr for JackknifeForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(JackknifeForm::Exact),
            "large_k" | "approx" => Ok(JackknifeForm::LargeK),
            other => Err(Error::Config(format!("unknown jackknife form `{other}`"))),
        }
    }
}

fn in_event_x(sample: &ProbabilitySample, event: &Event) -> Vec<f64> {
    sample
        .draws()
        .iter()
        .filter(|d| event.contains(d.outcome))
        .map(|d| d.x)
        .collect()
}

/// Harmonic-mean estimator `π̂₂ = m k / Σ_{i≤k} 1/xᵢ` with exact jackknife variance.
pub fn pi2(sample: &ProbabilitySample, event: &Event) -> Result<EstimateReport> {
    pi2_with(sample, event, JackknifeForm::Exact)
}

pub fn pi2_with(
    sample: &ProbabilitySample,
    event: &Event,
    form: JackknifeForm,
) -> Result<EstimateReport> {
    let n = require_nonempty(sample)? as usize;
    let xs = in_event_x(sample, event);
    let k = xs.len();
    if k == 0 {
        return Err(Error::NoInformation(
            "harmonic-mean estimator needs at least one draw in the event".into(),
        ));
    }
    let m = event.cardinality() as f64;
    let inv_sum = compensated_sum(xs.iter().map(|x| 1.0 / x));
    let mut report = EstimateReport::new(EstimatorId::Pi2, m * k as f64 / inv_sum, n, k);
    if k >= 2 {
        report = report.with_variance(m * m * jackknife_harmonic(&xs, form));
    } else {
        report = report.note("single draw in the event: no jackknife variance");
    }
    Ok(report)
}

/// Jackknife variance `û` of the harmonic mean of `xs` (requires `len ≥ 2`).
fn jackknife_harmonic(xs: &[f64], form: JackknifeForm) -> f64 {
    let ones = vec![1.0; xs.len()];
    let inv: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
    jackknife_ratio(&ones, &inv, xs, form)
}

/// Jackknife variance of `Z/W = Σ zᵢ / Σ wᵢ`; `xs` are the per-draw values
/// `zᵢ/wᵢ`, used by the large-`k` form.
pub(crate) fn jackknife_ratio(z: &[f64], w: &[f64], xs: &[f64], form: JackknifeForm) -> f64 {
    let k = z.len();
    if xs.windows(2).all(|p| p[0] == p[1]) && w.windows(2).all(|p| p[0] == p[1]) {
        return 0.0;
    }
    let kf = k as f64;
    let z_sum = compensated_sum(z.iter().copied());
    let w_sum = compensated_sum(w.iter().copied());
    let full = z_sum / w_sum;
    let acc = match form {
        JackknifeForm::Exact => compensated_sum((0..k).map(|i| {
            let loo = (z_sum - z[i]) / (w_sum - w[i]);
            (full - loo) * (full - loo)
        })),
        JackknifeForm::LargeK => {
            let s = compensated_sum(xs.iter().map(|x| {
                let r = 1.0 - full / x;
                r * r
            }));
            return (kf - 1.0) / (kf * kf * kf) * s * full * full;
        }
    };
    (kf - 1.0) / kf * acc
}

/// Jackknife estimate `v̂₂ = m² û` of the variance of [`pi2`].
pub fn v2_jackknife(sample: &ProbabilitySample, event: &Event, form: JackknifeForm) -> Result<f64> {
    let xs = in_event_x(sample, event);
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    let m = event.cardinality() as f64;
    Ok(m * m * jackknife_harmonic(&xs, form))
}

/// Large-`k` (delta-method) variance of [`pi2`] given `k` draws in the event:
/// `v₂ = π² / (m² k) [Σ_{ω∈A} π/p(ω) - m²]`.
pub fn v2_exact(dist: &DiscreteDistribution, event: &Event, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let weights: Vec<f64> = event.weights_in(dist).collect();
    if weights.is_empty() {
        return Err(Error::InvalidEvent("empty event".into()));
    }
    if weights.iter().any(|&p| p <= 0.0) {
        return Err(Error::InfiniteVariance(
            "an outcome of the event has zero probability".into(),
        ));
    }
    let pi = compensated_sum(weights.iter().copied());
    let m = weights.len() as f64;
    let inv_conditional = compensated_sum(weights.iter().map(|p| pi / p));
    Ok(pi * pi / (m * m * k as f64) * (inv_conditional - m * m))
}
