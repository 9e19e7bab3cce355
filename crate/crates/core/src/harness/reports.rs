use serde::Serialize;

use crate::epidemic::{
    chain_complement_prob, chain_event_classes, chain_pi_2f1, chain_pi_analytic, ChainParams,
};
use crate::error::Result;
use crate::estimators::{v0_exact, v1_exact_classes};
use crate::importance::{design_objective, optimal_design, SamplingDesign};
use crate::oracle::{simplex_grid_search, EnumerationBudget, GridSearchResult};
use crate::sample_space::{DiscreteDistribution, Event};

/// Seeding probabilities scanned by [`chain_sweep`].
pub const SWEEP_P1: [f64; 9] = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0];
/// Transmission probabilities scanned by [`chain_sweep`].
pub const SWEEP_P2: [f64; 12] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0];

/// Exact quantities of the chain event `{node L infected by T}` at sample size `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub length: u32,
    pub horizon: u32,
    pub p1: f64,
    pub p2: f64,
    pub n: u64,
    pub pi_analytic: f64,
    /// Closed form; absent when `p2 = 1` or `T + 2 ≤ L`.
    pub pi_2f1: Option<f64>,
    pub complement: f64,
    /// Outcomes of positive probability in the event.
    pub event_size: u64,
    pub v0: f64,
    pub v1: f64,
    pub v1_over_v0: f64,
    pub v1_below_v0: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p1: f64,
    pub p2: f64,
    pub pi: f64,
    pub v0: f64,
    pub v1: f64,
    pub v1_below_v0: bool,
}

fn variances(params: &ChainParams, n: u64) -> (f64, f64, f64) {
    let pi = chain_pi_analytic(params);
    (
        pi,
        v0_exact(pi, n),
        v1_exact_classes(&chain_event_classes(params), n),
    )
}

pub fn chain_report(params: &ChainParams, n: u64) -> ChainReport {
    let (pi, v0, v1) = variances(params, n);
    ChainReport {
        length: params.length,
        horizon: params.horizon,
        p1: params.p1,
        p2: params.p2,
        n,
        pi_analytic: pi,
        pi_2f1: chain_pi_2f1(params).ok(),
        complement: chain_complement_prob(params),
        event_size: chain_event_classes(params).iter().map(|c| c.count).sum(),
        v0,
        v1,
        v1_over_v0: v1 / v0,
        v1_below_v0: v1 < v0,
        sweep: Vec::new(),
    }
}

/// `v1 < v0` over a `(p1, p2)` grid for fixed `L`, `T` and `n`.
pub fn chain_sweep(
    length: u32,
    horizon: u32,
    n: u64,
    p1s: &[f64],
    p2s: &[f64],
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(p1s.len() * p2s.len());
    for &p1 in p1s {
        for &p2 in p2s {
            let params = ChainParams::new(length, horizon, p1, p2)?;
            let (pi, v0, v1) = variances(&params, n);
            out.push(SweepPoint {
                p1,
                p2,
                pi,
                v0,
                v1,
                v1_below_v0: v1 < v0,
            });
        }
    }
    Ok(out)
}

/// The optimal design next to the uniform design on `A` and, optionally,
/// the best design on a simplex grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub design: SamplingDesign,
    pub uniform_objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSearchResult>,
}

pub fn design_report(
    dist: &DiscreteDistribution,
    event: &Event,
    n: u64,
    grid_step: Option<f64>,
    budget: &EnumerationBudget,
) -> Result<DesignReport> {
    let design = optimal_design(dist, event, n)?;
    let m = design.entries.len() as f64;
    let uniform_objective = design_objective(design.entries.iter().map(|e| (e.p, 1.0 / m)), n);
    let grid = grid_step
        .map(|step| simplex_grid_search(dist, event, n, step, budget))
        .transpose()?;
    Ok(DesignReport {
        design,
        uniform_objective,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_exhibits_the_claim() {
        let params = ChainParams::new(10, 20, 0.1, 0.5).unwrap();
        let r = chain_report(&params, 10);
        assert!(r.v1_below_v0);
        assert!((r.pi_analytic - r.pi_2f1.unwrap()).abs() < 1e-10);
        assert!((r.pi_analytic + r.complement - 1.0).abs() < 1e-12);
        assert_eq!(r.event_size, 184_756);
    }

    #[test]
    fn sweep_covers_the_grid() {
        let s = chain_sweep(3, 6, 10, &SWEEP_P1[..3], &SWEEP_P2[..4]).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.iter().all(|p| p.v0 >= 0.0 && p.v1 >= 0.0));
    }

    #[test]
    fn design_report_compares_to_uniform_and_grid() {
        let d = DiscreteDistribution::from_weights(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let a = Event::new(d.outcomes().iter().copied());
        let r = design_report(&d, &a, 10, Some(0.05), &EnumerationBudget::default()).unwrap();
        assert!(r.design.objective <= r.uniform_objective);
        assert!(r.design.objective <= r.grid.unwrap().objective + 1e-12);
    }
}
