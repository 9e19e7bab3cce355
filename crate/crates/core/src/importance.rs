//! Estimators for samples drawn from a sampling distribution `p'` other than
//! the target `p`, and the sampling design that minimizes the large-`n`
//! variance of the inclusion-weighted estimator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    group_classes, ht_variance, ht_variance_hat, jackknife_ratio, JackknifeForm,
};
use crate::numeric::{compensated_sum, inclusion_prob, survival_pow};
use crate::sample_space::{
    DiscreteDistribution, Draw, EstimateReport, EstimatorId, Event, OutcomeId, ProbabilitySample,
};

/// A sample whose every draw carries its sampling probability `y = p'(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ISSample(ProbabilitySample);

impl ISSample {
    pub fn new(sample: ProbabilitySample) -> Result<Self> {
        if let Some(d) = sample.draws().iter().find(|d| d.y.is_none()) {
            return Err(Error::InvalidSample(format!(
                "outcome {} has no sampling probability",
                d.outcome
            )));
        }
        Ok(Self(sample))
    }

    /// Treats a plain sample as drawn from the target itself (`y = x`).
    pub fn from_target_sample(sample: &ProbabilitySample) -> Self {
        let draws = sample
            .draws()
            .iter()
            .map(|d| Draw::with_sampling(d.outcome, d.x, d.x))
            .collect();
        Self(ProbabilitySample::new(draws).expect("annotations already validated"))
    }

    pub fn sample(&self) -> &ProbabilitySample {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Likelihood ratios `zᵢ = xᵢ / yᵢ` in draw order.
    pub fn z(&self) -> Vec<f64> {
        self.0.draws().iter().map(Draw::ratio).collect()
    }

    fn y(d: &Draw) -> f64 {
        d.y.expect("checked at construction")
    }
}

fn require_nonempty(sample: &ISSample) -> Result<u64> {
    if sample.is_empty() {
        Err(Error::EmptySample)
    } else {
        Ok(sample.len() as u64)
    }
}

/// Self-normalized ratio `Σ_{i≤k} zᵢ / Σ_{i≤n} zᵢ`; only asymptotically unbiased.
pub fn pi0_is(sample: &ISSample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)? as usize;
    let draws = sample.sample().draws();
    let k = sample.sample().count_in(event);
    let inside = compensated_sum(
        draws
            .iter()
            .filter(|d| event.contains(d.outcome))
            .map(Draw::ratio),
    );
    let total = compensated_sum(draws.iter().map(Draw::ratio));
    Ok(
        EstimateReport::new(EstimatorId::Pi0Is, inside / total, n, k)
            .note("self-normalized ratio: unbiased only as n grows"),
    )
}

/// `π̂₁ = Σ_{ω∈O∩A} p(ω) / (1 - q'(ω)^n)` with the design's inclusion probabilities.
///
/// When `design` is given and leaves part of `A` unsupported, the estimate is
/// biased low by that part's target mass; a note records it.
pub fn pi1_is(
    sample: &ISSample,
    event: &Event,
    design: Option<&SamplingDesign>,
) -> Result<EstimateReport> {
    let n = require_nonempty(sample)?;
    let k = sample.sample().count_in(event);
    let observed: Vec<Draw> = sample
        .sample()
        .observed_set()?
        .into_iter()
        .filter(|d| event.contains(d.outcome))
        .collect();
    let est = compensated_sum(
        observed
            .iter()
            .map(|d| d.x / inclusion_prob(ISSample::y(d), n)),
    );
    let terms: Vec<(f64, f64)> = observed.iter().map(|d| (d.x, ISSample::y(d))).collect();
    let mut report = EstimateReport::new(EstimatorId::Pi1Is, est, n as usize, k)
        .with_variance(ht_variance_hat(&terms, n));
    if let Some(design) = design {
        if design.excluded_mass > 0.0 {
            report = report.note(format!(
                "design leaves target mass {} of the event unsupported; estimate is biased low by it",
                design.excluded_mass
            ));
        }
    }
    Ok(report)
}

/// Exact variance of [`pi1_is`] when `n` draws come from `sampling` and the
/// weights from `target`. Outcomes with `p'(ω) = 0` are never observed and
/// contribute nothing.
pub fn v1_is_exact(
    target: &DiscreteDistribution,
    sampling: &DiscreteDistribution,
    event: &Event,
    n: u64,
) -> Result<f64> {
    let mut pairs = Vec::new();
    for id in event.members() {
        let p = target
            .weight(id)
            .ok_or_else(|| Error::InvalidEvent(format!("{id} not in target")))?;
        let q = sampling.weight(id).unwrap_or(0.0);
        pairs.push((p, q));
    }
    Ok(ht_variance(&group_classes(pairs), n))
}

/// Unbiased estimate of [`v1_is_exact`] from the sample.
pub fn v1_is_hat(sample: &ISSample, event: &Event) -> Result<f64> {
    let n = require_nonempty(sample)?;
    let terms: Vec<(f64, f64)> = sample
        .sample()
        .observed_set()?
        .into_iter()
        .filter(|d| event.contains(d.outcome))
        .map(|d| (d.x, ISSample::y(&d)))
        .collect();
    Ok(ht_variance_hat(&terms, n))
}

fn in_event(sample: &ISSample, event: &Event) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut z = Vec::new();
    let mut w = Vec::new();
    let mut x = Vec::new();
    for d in sample
        .sample()
        .draws()
        .iter()
        .filter(|d| event.contains(d.outcome))
    {
        z.push(d.ratio());
        w.push(1.0 / ISSample::y(d));
        x.push(d.x);
    }
    (z, w, x)
}

/// `π̂₂ = m Z / W` with `Z = Σ_{i≤k} zᵢ`, `W = Σ_{i≤k} 1/yᵢ`.
pub fn pi2_is(sample: &ISSample, event: &Event) -> Result<EstimateReport> {
    let n = require_nonempty(sample)? as usize;
    let (z, w, x) = in_event(sample, event);
    let k = z.len();
    if k == 0 {
        return Err(Error::NoInformation(
            "harmonic-mean estimator needs at least one draw in the event".into(),
        ));
    }
    let m = event.cardinality() as f64;
    let ratio = compensated_sum(z.iter().copied()) / compensated_sum(w.iter().copied());
    let mut report = EstimateReport::new(EstimatorId::Pi2Is, m * ratio, n, k);
    if k >= 2 {
        report = report.with_variance(m * m * jackknife_ratio(&z, &w, &x, JackknifeForm::Exact));
    }
    Ok(report)
}

/// `v̂₂ = m² (k-1)/k Σᵢ (Z/W - (Z - zᵢ)/(W - 1/yᵢ))²`.
pub fn v2_is_jackknife(sample: &ISSample, event: &Event) -> Result<f64> {
    let (z, w, x) = in_event(sample, event);
    if z.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: z.len(),
        });
    }
    let m = event.cardinality() as f64;
    Ok(m * m * jackknife_ratio(&z, &w, &x, JackknifeForm::Exact))
}

/// One outcome of the event with its target and design probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignEntry {
    pub outcome: OutcomeId,
    pub p: f64,
    pub p_prime: f64,
}

/// Sampling distribution concentrated on the most probable outcomes of `A`.
///
/// Within the support `A'(α) = {ω ∈ A : p(ω) ≥ α}` the weights are
/// `p'(ω) = 1 - C p(ω)^{-2/(n-1)}` with `C = (|A'| - 1) / Σ_{A'} p^{-2/(n-1)}`;
/// outside it `p'` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingDesign {
    /// Every outcome of the event, most probable first.
    pub entries: Vec<DesignEntry>,
    pub support_size: usize,
    /// Smallest target probability inside the support.
    pub alpha: f64,
    pub c: f64,
    pub n: u64,
    /// `Σ_{ω∈A} p² (1 - p')^n`, the large-`n` variance being minimized.
    pub objective: f64,
    /// Exact variance of `pi1_is` under this design.
    pub exact_v1: f64,
    /// Target mass of event outcomes left out of the support.
    pub excluded_mass: f64,
    /// Every support size `j` for which all `p'` came out nonnegative.
    pub feasible_sizes: Vec<usize>,
}

impl SamplingDesign {
    pub fn support(&self) -> impl Iterator<Item = &DesignEntry> {
        self.entries.iter().filter(|e| e.p_prime > 0.0)
    }

    /// The design as a distribution over `ids` (zero outside the support).
    pub fn to_distribution(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(self.entries.iter().map(|e| (e.outcome, e.p_prime)))
    }

    /// Writes `outcome_id,p,p_prime` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["outcome_id", "p", "p_prime"])?;
        for e in &self.entries {
            w.write_record([
                e.outcome.to_string(),
                e.p.to_string(),
                e.p_prime.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `Σ p² (1 - p')^n` over `(p, p')` pairs.
pub fn design_objective<I: IntoIterator<Item = (f64, f64)>>(pairs: I, n: u64) -> f64 {
    compensated_sum(pairs.into_iter().map(|(p, pp)| p * p * survival_pow(pp, n)))
}

const FEASIBILITY_SLACK: f64 = 1e-12;

/// Builds the large-`n` optimal design for sampling `A` in `n` draws.
///
/// Outcomes of `A` are sorted by `p` descending (ties by outcome id). For
/// `j = 1, 2, …` the interior solution on the top `j` outcomes is computed;
/// the largest `j` whose weights are all nonnegative is kept.
pub fn optimal_design(
    dist: &DiscreteDistribution,
    event: &Event,
    n: u64,
) -> Result<SamplingDesign> {
    if n < 2 {
        return Err(Error::Config("optimal design needs n ≥ 2".into()));
    }
    let mut ranked: Vec<(OutcomeId, f64)> = event
        .members()
        .map(|id| {
            dist.weight(id)
                .map(|p| (id, p))
                .ok_or_else(|| Error::InvalidEvent(format!("{id} not in distribution")))
        })
        .collect::<Result<_>>()?;
    if ranked.is_empty() {
        return Err(Error::InvalidEvent(
            "optimal design needs a nonempty event".into(),
        ));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if ranked[0].1 <= 0.0 {
        return Err(Error::InvalidEvent("event has zero probability".into()));
    }

    let exponent = -2.0 / (n as f64 - 1.0);
    let scaled: Vec<f64> = ranked.iter().map(|&(_, p)| p.powf(exponent)).collect();
    let mut feasible_sizes = Vec::new();
    let mut prefix = 0.0;
    let mut best = (1usize, 0.0f64);
    for j in 1..=ranked.len() {
        if ranked[j - 1].1 <= 0.0 {
            break;
        }
        prefix += scaled[j - 1];
        let c = (j as f64 - 1.0) / prefix;
        // the smallest weight belongs to the least probable included outcome
        if 1.0 - c * scaled[j - 1] >= -FEASIBILITY_SLACK {
            feasible_sizes.push(j);
            best = (j, c);
        }
    }
    let (support_size, c) = best;

    let mut entries: Vec<DesignEntry> = ranked
        .iter()
        .enumerate()
        .map(|(i, &(outcome, p))| DesignEntry {
            outcome,
            p,
            p_prime: if i < support_size {
                (1.0 - c * scaled[i]).max(0.0)
            } else {
                0.0
            },
        })
        .collect();
    let total = compensated_sum(entries.iter().map(|e| e.p_prime));
    for e in &mut entries {
        e.p_prime /= total;
    }

    let objective = design_objective(entries.iter().map(|e| (e.p, e.p_prime)), n);
    let exact_v1 = ht_variance(&group_classes(entries.iter().map(|e| (e.p, e.p_prime))), n);
    let excluded_mass = compensated_sum(entries[support_size..].iter().map(|e| e.p));
    Ok(SamplingDesign {
        alpha: entries[support_size - 1].p,
        entries,
        support_size,
        c,
        n,
        objective,
        exact_v1,
        excluded_mass,
        feasible_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators;

    fn ids(v: &[u64]) -> Vec<OutcomeId> {
        v.iter().map(|&i| OutcomeId(i)).collect()
    }

    fn is_sample(draws: &[(u64, f64, f64)]) -> ISSample {
        ISSample::new(
            ProbabilitySample::new(
                draws
                    .iter()
                    .map(|&(i, x, y)| Draw::with_sampling(OutcomeId(i), x, y))
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn requires_sampling_probabilities() {
        let s = ProbabilitySample::new(vec![Draw::new(OutcomeId(0), 0.5)]).unwrap();
        assert!(ISSample::new(s).is_err());
    }

    #[test]
    fn pi0_is_examples() {
        let a = Event::new(ids(&[0]));
        let s = is_sample(&[(0, 0.5, 0.25), (1, 0.5, 0.5)]);
        assert!((pi0_is(&s, &a).unwrap().estimate - 2.0 / 3.0).abs() < 1e-15);
        let s = is_sample(&[(1, 0.5, 0.5), (1, 0.5, 0.5)]);
        assert_eq!(pi0_is(&s, &a).unwrap().estimate, 0.0);
        let s = is_sample(&[(0, 0.3, 0.3), (1, 0.7, 0.7), (1, 0.7, 0.7)]);
        assert_eq!(pi0_is(&s, &a).unwrap().estimate, 1.0 / 3.0);
    }

    #[test]
    fn pi1_is_examples() {
        let a = Event::new(ids(&[0]));
        let s = is_sample(&[(0, 0.3, 0.5), (1, 0.7, 0.5)]);
        assert!((pi1_is(&s, &a, None).unwrap().estimate - 0.4).abs() < 1e-15);
        let s = is_sample(&[(1, 0.7, 0.5), (1, 0.7, 0.5)]);
        assert_eq!(pi1_is(&s, &a, None).unwrap().estimate, 0.0);
    }

    #[test]
    fn v1_is_exact_reduces_and_handles_empty_event() {
        let d = DiscreteDistribution::from_weights(&[0.5, 0.3, 0.2]).unwrap();
        let a = Event::new(ids(&[0, 1]));
        for n in 1..5 {
            assert_eq!(
                v1_is_exact(&d, &d, &a, n).unwrap(),
                estimators::v1_exact(&d, &a, n)
            );
        }
        assert_eq!(v1_is_exact(&d, &d, &Event::new([]), 3).unwrap(), 0.0);
    }

    #[test]
    fn pi2_is_examples() {
        let a = Event::new(ids(&[0, 1]));
        let s = is_sample(&[(0, 0.5, 0.4), (1, 0.3, 0.6), (2, 0.2, 0.1)]);
        // Z = 1.75, W = 2.5 + 5/3, ξ̂ = 0.42
        let r = pi2_is(&s, &a).unwrap();
        assert!((r.estimate - 0.84).abs() < 1e-15);
        // leave-one-out ratios 0.5/(5/3) = 0.3 and 1.25/2.5 = 0.5:
        // v̂₂ = 4 · ½ (0.12² + 0.08²) = 0.0416
        let v = v2_is_jackknife(&s, &a).unwrap();
        assert!((v - 0.0416).abs() < 1e-15, "{v}");

        let s = is_sample(&[(0, 0.5, 0.4), (0, 0.5, 0.4)]);
        assert_eq!(pi2_is(&s, &a).unwrap().estimate, 1.0);
        assert_eq!(v2_is_jackknife(&s, &a).unwrap(), 0.0);

        let s = is_sample(&[(2, 0.2, 0.1)]);
        assert!(matches!(pi2_is(&s, &a), Err(Error::NoInformation(_))));
        assert!(matches!(
            v2_is_jackknife(&s, &a),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn design_for_uniform_event_is_uniform() {
        let d = DiscreteDistribution::from_weights(&[0.2, 0.2, 0.2, 0.4]).unwrap();
        let a = Event::new(ids(&[0, 1, 2]));
        let design = optimal_design(&d, &a, 10).unwrap();
        assert_eq!(design.support_size, 3);
        for e in &design.entries {
            assert!((e.p_prime - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(design.excluded_mass, 0.0);
    }

    #[test]
    fn design_for_single_outcome_is_point_mass() {
        let d = DiscreteDistribution::from_weights(&[0.3, 0.7]).unwrap();
        let design = optimal_design(&d, &Event::new(ids(&[0])), 5).unwrap();
        assert_eq!(
            design.entries,
            vec![DesignEntry {
                outcome: OutcomeId(0),
                p: 0.3,
                p_prime: 1.0
            }]
        );
        assert_eq!(design.c, 0.0);
        assert_eq!(design.objective, 0.0);
    }

    #[test]
    fn design_drops_improbable_outcomes() {
        // p spread over two decades: only the top few get sampling mass
        let raw: Vec<f64> = (0..8).map(|i| 10f64.powf(-2.0 * i as f64 / 7.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|p| 0.5 * p / total).collect();
        w.push(0.5);
        let d = DiscreteDistribution::from_weights(&w).unwrap();
        let a = Event::new((0..8).map(OutcomeId));
        let design = optimal_design(&d, &a, 10).unwrap();
        assert!(design.support_size < 8);
        assert!(design.excluded_mass > 0.0);
        let sum: f64 = design.entries.iter().map(|e| e.p_prime).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let support: Vec<_> = design.support().collect();
        let spread = support.iter().map(|e| e.p_prime).fold(f64::MIN, f64::max)
            - support.iter().map(|e| e.p_prime).fold(f64::MAX, f64::min);
        let exponent = -2.0 / 9.0;
        let bound = design.c * (design.alpha.powf(exponent) - support[0].p.powf(exponent));
        assert!(spread <= bound + 1e-12);
        // no worse than uniform on the same support
        let uniform = design_objective(
            design.entries.iter().enumerate().map(|(i, e)| {
                (
                    e.p,
                    if i < design.support_size {
                        1.0 / design.support_size as f64
                    } else {
                        0.0
                    },
                )
            }),
            10,
        );
        assert!(design.objective <= uniform + 1e-12);
    }

    #[test]
    fn design_csv_layout() {
        let d = DiscreteDistribution::from_weights(&[0.25, 0.25, 0.5]).unwrap();
        let design = optimal_design(&d, &Event::new(ids(&[0, 1])), 4).unwrap();
        let mut buf = Vec::new();
        design.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "outcome_id,p,p_prime\n0,0.25,0.5\n1,0.25,0.5\n"
        );
    }
}
