//! Was there an outbreak? Simulate one on a small contact network, then test
//! whether all-negative sentinel results are plausible under it.
//!
//! cargo run --release --example network_hypothesis_test

use probest::epidemic::{EdgeTimeProb, Graph, NodeTimeProb, SIModel, SentinelSchedule};
use probest::estimators::JackknifeForm;
use probest::harness::{run_hypothesis_test, ResolvedModel};
use probest::EstimatorId;

fn main() -> probest::Result<()> {
    // a 4 x 4 grid
    let side = 4;
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                edges.push((v, v + 1));
                edges.push((v + 1, v));
            }
            if r + 1 < side {
                edges.push((v, v + side));
                edges.push((v + side, v));
            }
        }
    }
    let model = SIModel::new(
        Graph::new(side * side, &edges)?,
        NodeTimeProb::Constant(0.02),
        EdgeTimeProb::Constant(0.3),
        8,
    )?;
    let schedule = SentinelSchedule::new(vec![(0, 4), (5, 6), (10, 8), (15, 8)]);
    let resolved = ResolvedModel {
        model,
        schedule,
        chain: None,
    };
    for estimator in [EstimatorId::Pi0, EstimatorId::Pi1] {
        let result = run_hypothesis_test(
            &resolved,
            0.01,
            2000,
            estimator,
            5,
            JackknifeForm::Exact,
            None,
        )?;
        println!(
            "{}",
            serde_json::to_string_pretty(&result).expect("serializable")
        );
    }
    Ok(())
}
