//! The relative frequency `k/n` against the inclusion-weighted estimator on
//! a small distribution whose outcome probabilities are known.
//!
//! cargo run --example inclusion_vs_frequency

use probest::estimators::{pi0, pi1, pi1_combined, pi1_dual, v0_exact, v1_exact};
use probest::harness::replication_rng;
use probest::oracle::exact_pi;
use probest::{DiscreteDistribution, Event, OutcomeId};

fn main() -> probest::Result<()> {
    let dist = DiscreteDistribution::from_weights(&[0.35, 0.25, 0.15, 0.1, 0.08, 0.05, 0.02])?;
    let event = Event::new([2, 4, 5].map(OutcomeId));
    let pi = exact_pi(&dist, &event);
    println!("pi = {pi}");

    let mut rng = replication_rng(42, 0, 0);
    let sample = dist.sample(20, &mut rng)?;
    for report in [
        pi0(&sample, &event)?,
        pi1(&sample, &event)?,
        pi1_dual(&sample, &event)?,
        pi1_combined(&sample, &event)?,
    ] {
        println!(
            "{:<13} estimate {:.6}  variance estimate {:?}",
            report.estimator.name(),
            report.estimate,
            report.variance_estimate
        );
    }

    println!("\n   n        v0            v1");
    for n in [1, 2, 5, 10, 20, 40, 80] {
        println!(
            "{n:>4}  {:.6e}  {:.6e}",
            v0_exact(pi, n),
            v1_exact(&dist, &event, n)
        );
    }
    Ok(())
}
