//! The chain `0 -> 1 -> ... -> L`: exact probability that the end is infected
//! by `T`, its variance under both estimators, and simulated trajectories
//! that carry their own probabilities.
//!
//! cargo run --release --example chain_toy

use probest::epidemic::{
    chain_outcome_prob, chain_pi_2f1, enumerate_chain_outcomes, simulate, ChainOutcome,
    ChainParams, ResidualMode, SIModel,
};
use probest::harness::{chain_report, replication_rng};

fn main() -> probest::Result<()> {
    let params = ChainParams::new(10, 20, 0.1, 0.5)?;
    let report = chain_report(&params, 10);
    println!("pi (series)    = {}", report.pi_analytic);
    println!("pi (2F1)       = {}", chain_pi_2f1(&params)?);
    println!("1 - complement = {}", 1.0 - report.complement);
    println!(
        "v0 = {:.9e}  v1 = {:.9e}  v1 < v0: {}",
        report.v0, report.v1, report.v1_below_v0
    );

    let small = ChainParams::new(2, 3, 0.3, 0.4)?;
    println!("\nall outcomes of L=2, T=3:");
    for (outcome, p) in enumerate_chain_outcomes(&small, 3, ResidualMode::Lumped, 1_000)? {
        println!("  {outcome:?}: {p:.6}");
    }

    let model = SIModel::chain(&small);
    let mut rng = replication_rng(7, 0, 0);
    println!("\nsimulated:");
    for _ in 0..4 {
        let t = simulate(&model, &mut rng);
        let outcome = ChainOutcome::from_trajectory(&t);
        print!("{}", t.dump());
        let exact = match &outcome {
            ChainOutcome::Spread(times) if times.len() == 2 => chain_outcome_prob(&small, times)?,
            other => other.probability(&small, 3)?,
        };
        println!(
            "  {outcome:?}  exp(logp) = {:.6}  exact = {exact:.6}\n",
            t.probability()
        );
    }
    Ok(())
}
