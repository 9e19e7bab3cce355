//! The chain toy model: nodes `0..=L` on a path, node 0 seeded at `t = 0`
//! with probability `p1`, each link passing the infection with probability
//! `p2` per step. Given the seed, an outcome is the tuple of first-infection
//! times `t_1 < … < t_L`.

use itertools::Itertools;

use super::hypergeometric::hyp2f1;
use super::Trajectory;
use crate::error::{Error, Result};
use crate::estimators::ProbabilityClass;
use crate::numeric::{binomial, binomial_u128, CompensatedSum};
use crate::sample_space::OutcomeId;

/// Remainder bound at which the tail series stops.
const TAIL_TOLERANCE: f64 = 1e-16;
const SERIES_REL_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    /// Number of links; nodes are `0..=length`.
    pub length: u32,
    /// Horizon `T`.
    pub horizon: u32,
    pub p1: f64,
    pub p2: f64,
}

impl ChainParams {
    pub fn new(length: u32, horizon: u32, p1: f64, p2: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidModel(
                "chain length must be at least 1".into(),
            ));
        }
        if !(p1 > 0.0 && p1 <= 1.0) || !(p2 > 0.0 && p2 <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "chain needs 0 < p1, p2 <= 1, got p1 = {p1}, p2 = {p2}"
            )));
        }
        Ok(Self {
            length,
            horizon,
            p1,
            p2,
        })
    }

    pub fn q2(&self) -> f64 {
        1.0 - self.p2
    }

    pub fn with_horizon(self, horizon: u32) -> Self {
        Self { horizon, ..self }
    }

    /// `p1 · p2^links · q2^waits`.
    fn weight(&self, links: u32, waits: u32) -> f64 {
        self.p1 * self.p2.powi(links as i32) * self.q2().powi(waits as i32)
    }
}

fn check_times(params: &ChainParams, times: &[u32]) -> Result<()> {
    if times.len() > params.length as usize {
        return Err(Error::InvalidEncoding(format!(
            "{} first-infection times for a chain of length {}",
            times.len(),
            params.length
        )));
    }
    for (i, &t) in times.iter().enumerate() {
        if t < i as u32 + 1 {
            return Err(Error::InvalidEncoding(format!(
                "node {} infected at {t}, before it can be reached",
                i + 1
            )));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::InvalidEncoding(
                "first-infection times must increase".into(),
            ));
        }
    }
    Ok(())
}

/// `p1 · p2^L · q2^(t_L - L)` for a complete tuple `t_1 < … < t_L`.
pub fn chain_outcome_prob(params: &ChainParams, times: &[u32]) -> Result<f64> {
    check_times(params, times)?;
    if times.len() != params.length as usize {
        return Err(Error::InvalidEncoding(format!(
            "expected {} first-infection times, got {}",
            params.length,
            times.len()
        )));
    }
    let last = times[times.len() - 1];
    Ok(params.weight(params.length, last - params.length))
}

/// `P(t_L = t | seed)` for `t = L, L+1, …`, generated by the term ratio
/// `t / (t - L + 1) · q2`.
struct ArrivalTerms {
    length: f64,
    q2: f64,
    t: u32,
    term: f64,
}

impl ArrivalTerms {
    fn new(params: &ChainParams) -> Self {
        Self {
            length: params.length as f64,
            q2: params.q2(),
            t: params.length,
            term: params.p2.powi(params.length as i32),
        }
    }

    /// Ratio of the next term to the current one.
    fn ratio(&self) -> f64 {
        let t = self.t as f64;
        t / (t - self.length + 1.0) * self.q2
    }

    fn advance(&mut self) {
        self.term *= self.ratio();
        self.t += 1;
    }
}

/// `π = P(node L infected by T) = p1 · p2^L · Σ_{t=L}^{T} C(t-1, L-1) q2^(t-L)`.
pub fn chain_pi_analytic(params: &ChainParams) -> f64 {
    let mut terms = ArrivalTerms::new(params);
    let mut acc = CompensatedSum::default();
    while terms.t <= params.horizon {
        acc.add(terms.term);
        terms.advance();
    }
    params.p1 * acc.value()
}

/// `P(t_L > h | seed)`, the tail of the arrival series.
fn arrival_tail(params: &ChainParams, h: u32) -> f64 {
    let mut terms = ArrivalTerms::new(params);
    let mut acc = CompensatedSum::default();
    loop {
        let r = terms.ratio();
        if terms.t > h {
            acc.add(terms.term);
            if r < 1.0 && terms.term * r / (1.0 - r) < TAIL_TOLERANCE {
                break;
            }
        }
        terms.advance();
    }
    acc.value()
}

/// `π = p1 (1 - p2^L q2^(T+1-L) C(T, L-1) ₂F₁(1, T+1; T+2-L; q2))`.
pub fn chain_pi_2f1(params: &ChainParams) -> Result<f64> {
    let q2 = params.q2();
    let (l, t) = (params.length, params.horizon);
    if !(q2 > 0.0 && q2 < 1.0) {
        return Err(Error::InvalidModel(format!(
            "closed form needs 0 < q2 < 1, got q2 = {q2}"
        )));
    }
    if t + 1 < l {
        return Err(Error::InvalidModel(format!(
            "closed form needs T + 2 - L > 0, got L = {l}, T = {t}"
        )));
    }
    let series = hyp2f1(
        1.0,
        t as f64 + 1.0,
        (t + 2 - l) as f64,
        q2,
        SERIES_REL_TOLERANCE,
    )?;
    let log_prefix = l as f64 * params.p2.ln()
        + (t + 1 - l) as f64 * q2.ln()
        + binomial(t as u64, l as u64 - 1).ln();
    Ok(params.p1 * (1.0 - log_prefix.exp() * series))
}

/// `1 - π = 1 - p1 + p1 · p2^L · Σ_{t>T} C(t-1, L-1) q2^(t-L)`.
pub fn chain_complement_prob(params: &ChainParams) -> f64 {
    (1.0 - params.p1) + params.p1 * arrival_tail(params, params.horizon)
}

/// One chain outcome observed up to a horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChainOutcome {
    NoSeed,
    /// First-infection times of nodes `1..=j`. With `j < L`, node `j + 1` is
    /// still susceptible at the horizon.
    Spread(Vec<u32>),
    /// Seeded, but node `L` not infected by the horizon (lumped residual).
    Beyond,
}

impl ChainOutcome {
    /// Probability of the outcome when observed up to `horizon`.
    pub fn probability(&self, params: &ChainParams, horizon: u32) -> Result<f64> {
        match self {
            ChainOutcome::NoSeed => Ok(1.0 - params.p1),
            ChainOutcome::Spread(times) => {
                check_times(params, times)?;
                if times.last().is_some_and(|&t| t > horizon) {
                    return Err(Error::InvalidEncoding(format!(
                        "infection time beyond horizon {horizon}"
                    )));
                }
                let j = times.len() as u32;
                if j == params.length {
                    chain_outcome_prob(params, times)
                } else {
                    Ok(params.weight(j, horizon - j))
                }
            }
            ChainOutcome::Beyond => Ok(params.p1 * arrival_tail(params, horizon)),
        }
    }

    /// Whether node `L` is infected by `horizon`.
    pub fn reaches_end_by(&self, params: &ChainParams, horizon: u32) -> bool {
        match self {
            ChainOutcome::Spread(times) => {
                times.len() == params.length as usize && times.last().is_some_and(|&t| t <= horizon)
            }
            _ => false,
        }
    }

    /// The infection matrix on nodes `0..=L` over steps `0..=horizon`.
    pub fn to_trajectory(&self, params: &ChainParams, horizon: u32) -> Result<Trajectory> {
        let n = params.length as usize + 1;
        let mut first = vec![None; n];
        if let ChainOutcome::Spread(times) = self {
            first[0] = Some(0);
            for (i, &t) in times.iter().enumerate() {
                first[i + 1] = Some(t);
            }
        } else if *self == ChainOutcome::Beyond {
            return Err(Error::InvalidEncoding(
                "the lumped residual is not a single trajectory".into(),
            ));
        }
        let p = self.probability(params, horizon)?;
        Ok(Trajectory::from_first_infections(
            n,
            horizon,
            &first,
            p.ln(),
        ))
    }

    pub fn from_trajectory(trajectory: &Trajectory) -> Self {
        if !trajectory.is_infected(0, 0) {
            return ChainOutcome::NoSeed;
        }
        let times = (1..trajectory.node_count())
            .map_while(|v| trajectory.first_infection(v))
            .collect();
        ChainOutcome::Spread(times)
    }

    /// Trajectory hash for real trajectories; a fixed tag for the residual.
    pub fn outcome_id(&self, params: &ChainParams, horizon: u32) -> Result<OutcomeId> {
        match self {
            ChainOutcome::Beyond => Ok(OutcomeId(u64::MAX)),
            _ => Ok(self.to_trajectory(params, horizon)?.outcome_id()),
        }
    }
}

/// How outcomes with `t_L > t_max` are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualMode {
    /// A single [`ChainOutcome::Beyond`].
    #[default]
    Lumped,
    /// Every partial spread observed at `t_max`.
    Expanded,
}

/// Every outcome observed up to `t_max` with positive probability.
///
/// Order: no seed, complete tuples in lexicographic order, then the residual.
pub fn enumerate_chain_outcomes(
    params: &ChainParams,
    t_max: u32,
    mode: ResidualMode,
    budget: u64,
) -> Result<Vec<(ChainOutcome, f64)>> {
    let l = params.length;
    if t_max < l {
        return Err(Error::InvalidModel(format!(
            "t_max = {t_max} is below the chain length {l}"
        )));
    }
    let mut required = 1 + binomial_u128(t_max as u64, l as u64);
    required = required.saturating_add(match mode {
        ResidualMode::Lumped => 1,
        ResidualMode::Expanded => (0..l)
            .map(|j| binomial_u128(t_max as u64, j as u64))
            .fold(0u128, u128::saturating_add),
    });
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let mut out = Vec::with_capacity(required as usize);
    let mut push = |o: ChainOutcome| -> Result<()> {
        let p = o.probability(params, t_max)?;
        if p > 0.0 {
            out.push((o, p));
        }
        Ok(())
    };
    push(ChainOutcome::NoSeed)?;
    for times in (1..=t_max).combinations(l as usize) {
        push(ChainOutcome::Spread(times))?;
    }
    match mode {
        ResidualMode::Lumped => push(ChainOutcome::Beyond)?,
        ResidualMode::Expanded => {
            for j in 0..l as usize {
                for times in (1..=t_max).combinations(j) {
                    push(ChainOutcome::Spread(times))?;
                }
            }
        }
    }
    Ok(out)
}

/// The event `{t_L ≤ T}` grouped by `t_L`: `C(t_L - 1, L - 1)` outcomes of
/// probability `p1 p2^L q2^(t_L - L)` each. Zero-probability classes are dropped.
pub fn chain_event_classes(params: &ChainParams) -> Vec<ProbabilityClass> {
    let l = params.length;
    (l..=params.horizon)
        .map(|t| {
            ProbabilityClass::plain(
                params.weight(l, t - l),
                binomial_u128(t as u64 - 1, l as u64 - 1).min(u64::MAX as u128) as u64,
            )
        })
        .filter(|c| c.weight > 0.0)
        .collect()
}

/// The complement `{t_L > T}` observed at `T`: the unseeded path plus
/// `C(T, j)` partial spreads of probability `p1 p2^j q2^(T - j)` for each
/// `j < L`. Zero-probability classes are dropped.
pub fn chain_complement_classes(params: &ChainParams) -> Vec<ProbabilityClass> {
    let t = params.horizon;
    std::iter::once(ProbabilityClass::plain(1.0 - params.p1, 1))
        .chain((0..params.length.min(t + 1)).map(|j| {
            ProbabilityClass::plain(
                params.weight(j, t - j),
                binomial_u128(t as u64, j as u64).min(u64::MAX as u128) as u64,
            )
        }))
        .filter(|c| c.weight > 0.0)
        .collect()
}

/// `|{t_L ≤ T}| = C(T, L)`, saturating.
pub fn chain_event_cardinality(params: &ChainParams) -> u64 {
    binomial_u128(params.horizon as u64, params.length as u64).min(u64::MAX as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: u32, t: u32, p1: f64, p2: f64) -> ChainParams {
        ChainParams::new(l, t, p1, p2).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn outcome_probability_examples() {
        let c = params(1, 5, 0.3, 0.4);
        assert!(close(
            chain_outcome_prob(&c, &[1]).unwrap(),
            0.3 * 0.4,
            1e-16
        ));
        assert!(close(
            chain_outcome_prob(&c, &[3]).unwrap(),
            0.3 * 0.6 * 0.6 * 0.4,
            1e-16
        ));
        let d = params(4, 5, 0.3, 1.0);
        assert_eq!(chain_outcome_prob(&d, &[1, 2, 3, 4]).unwrap(), 0.3);
        assert_eq!(chain_outcome_prob(&d, &[1, 2, 3, 5]).unwrap(), 0.0);
    }

    #[test]
    fn invalid_encodings() {
        let c = params(3, 5, 0.3, 0.4);
        assert!(chain_outcome_prob(&c, &[1, 1, 2]).is_err());
        assert!(chain_outcome_prob(&c, &[1, 2]).is_err());
        assert!(chain_outcome_prob(&c, &[0, 2, 3]).is_err());
        assert!(chain_outcome_prob(&c, &[2, 3, 3]).is_err());
        assert!(ChainParams::new(0, 3, 0.5, 0.5).is_err());
        assert!(ChainParams::new(1, 3, 0.0, 0.5).is_err());
    }

    #[test]
    fn analytic_pi_examples() {
        let (p1, p2) = (0.3, 0.4);
        assert!(close(
            chain_pi_analytic(&params(1, 1, p1, p2)),
            p1 * p2,
            1e-16
        ));
        assert!(close(
            chain_pi_analytic(&params(1, 2, p1, p2)),
            p1 * (1.0 - 0.36),
            1e-16
        ));
        assert_eq!(chain_pi_analytic(&params(3, 7, p1, 1.0)), p1);
        assert_eq!(chain_pi_analytic(&params(3, 2, p1, p2)), 0.0);
    }

    #[test]
    fn closed_form_agrees() {
        let c = params(10, 20, 0.1, 0.5);
        let a = chain_pi_analytic(&c);
        assert!(close(chain_pi_2f1(&c).unwrap(), a, 1e-10));
        assert!(close(a, 0.058_809_852_6, 1e-10));
        let one = params(1, 1, 0.3, 0.4);
        assert!(close(chain_pi_2f1(&one).unwrap(), 0.12, 1e-12));
        let near_one = params(3, 9, 0.7, 1.0 - 1e-9);
        assert!(close(chain_pi_2f1(&near_one).unwrap(), 0.7, 1e-8));
        assert!(chain_pi_2f1(&params(3, 9, 0.7, 1.0)).is_err());
        assert!(chain_pi_2f1(&params(5, 3, 0.7, 0.5)).is_err());
    }

    #[test]
    fn complement_examples() {
        let c = params(10, 20, 0.1, 0.5);
        assert!(close(
            chain_complement_prob(&c) + chain_pi_analytic(&c),
            1.0,
            1e-12
        ));
        for t in 0..12 {
            let g = params(1, t, 0.35, 0.2);
            let closed = 0.65 + 0.35 * 0.8_f64.powi(t as i32);
            assert!(close(chain_complement_prob(&g), closed, 1e-14));
        }
        assert_eq!(chain_complement_prob(&params(2, 5, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn enumeration_examples() {
        let (p1, p2) = (0.3, 0.4);
        let c = params(1, 2, p1, p2);
        let out = enumerate_chain_outcomes(&c, 2, ResidualMode::Lumped, 100).unwrap();
        let expected = [
            (ChainOutcome::NoSeed, 1.0 - p1),
            (ChainOutcome::Spread(vec![1]), p1 * p2),
            (ChainOutcome::Spread(vec![2]), p1 * 0.6 * p2),
            (ChainOutcome::Beyond, p1 * 0.36),
        ];
        assert_eq!(out.len(), expected.len());
        for ((o, p), (eo, ep)) in out.iter().zip(&expected) {
            assert_eq!(o, eo);
            assert!(close(*p, *ep, 1e-16));
        }

        let det = enumerate_chain_outcomes(&params(3, 6, p1, 1.0), 6, ResidualMode::Expanded, 1000)
            .unwrap();
        assert_eq!(
            det,
            vec![
                (ChainOutcome::NoSeed, 1.0 - p1),
                (ChainOutcome::Spread(vec![1, 2, 3]), p1)
            ]
        );

        let c = params(3, 8, p1, p2);
        for mode in [ResidualMode::Lumped, ResidualMode::Expanded] {
            let out = enumerate_chain_outcomes(&c, 8, mode, 1000).unwrap();
            let total: f64 = out.iter().map(|(_, p)| p).sum();
            assert!(close(total, 1.0, 1e-12), "{mode:?}: {total}");
        }
    }

    #[test]
    fn enumeration_matches_analytic_pi_and_classes() {
        let c = params(3, 8, 0.3, 0.4);
        let out = enumerate_chain_outcomes(&c, 10, ResidualMode::Expanded, 10_000).unwrap();
        let in_a: f64 = out
            .iter()
            .filter(|(o, _)| o.reaches_end_by(&c, 8))
            .map(|(_, p)| p)
            .sum();
        assert!(close(in_a, chain_pi_analytic(&c), 1e-12));
        let classes = chain_event_classes(&c);
        let class_mass: f64 = classes.iter().map(|k| k.weight * k.count as f64).sum();
        assert!(close(class_mass, in_a, 1e-12));
        let count: u64 = classes.iter().map(|k| k.count).sum();
        assert_eq!(count, chain_event_cardinality(&c));
        assert_eq!(count, 56);

        let at_t = enumerate_chain_outcomes(&c, 8, ResidualMode::Expanded, 10_000).unwrap();
        let outside: f64 = at_t
            .iter()
            .filter(|(o, _)| !o.reaches_end_by(&c, 8))
            .map(|(_, p)| p)
            .sum();
        let complement = chain_complement_classes(&c);
        let complement_mass: f64 = complement.iter().map(|k| k.weight * k.count as f64).sum();
        assert!(close(complement_mass, outside, 1e-12));
        assert!(close(complement_mass, chain_complement_prob(&c), 1e-12));
    }

    #[test]
    fn budget_is_enforced() {
        let c = params(5, 20, 0.3, 0.4);
        assert!(matches!(
            enumerate_chain_outcomes(&c, 20, ResidualMode::Lumped, 100),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(enumerate_chain_outcomes(&c, 3, ResidualMode::Lumped, 100).is_err());
    }

    #[test]
    fn trajectory_round_trip() {
        let c = params(3, 6, 0.3, 0.4);
        for o in [
            ChainOutcome::NoSeed,
            ChainOutcome::Spread(vec![]),
            ChainOutcome::Spread(vec![2, 4]),
            ChainOutcome::Spread(vec![1, 3, 6]),
        ] {
            let t = o.to_trajectory(&c, 6).unwrap();
            assert_eq!(ChainOutcome::from_trajectory(&t), o);
            assert!(close(t.probability(), o.probability(&c, 6).unwrap(), 1e-15));
        }
        assert!(ChainOutcome::Beyond.to_trajectory(&c, 6).is_err());
        assert!(ChainOutcome::Spread(vec![1, 7]).probability(&c, 6).is_err());
    }
}
