//! Sampling from a design `p'` instead of the target `p`, and the design that
//! minimizes the variance of the inclusion-weighted estimator.
//!
//! cargo run --example importance_design

use probest::estimators::v1_exact;
use probest::harness::replication_rng;
use probest::importance::{optimal_design, pi0_is, pi1_is, v1_is_exact, ISSample};
use probest::oracle::exact_pi;
use probest::{DiscreteDistribution, Event, OutcomeId};

fn main() -> probest::Result<()> {
    let target = DiscreteDistribution::from_weights(&[0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.05, 0.02])?;
    let event = Event::new([1, 3, 6, 7].map(OutcomeId));
    let n = 10;
    println!("pi = {}", exact_pi(&target, &event));

    let design = optimal_design(&target, &event, n)?;
    println!("design (support {}):", design.support_size);
    for e in design.support() {
        println!(
            "  outcome {}  p = {:.3}  p' = {:.4}",
            e.outcome, e.p, e.p_prime
        );
    }
    let sampling = design.to_distribution()?;
    println!("v1 under p  = {:.6e}", v1_exact(&target, &event, n));
    println!(
        "v1 under p' = {:.6e}",
        v1_is_exact(&target, &sampling, &event, n)?
    );

    let mut rng = replication_rng(11, 0, 0);
    let sample = ISSample::new(sampling.sample_for(Some(&target), n as usize, &mut rng)?)?;
    println!("\none sample of {n} from p':");
    println!("  pi0_is = {:.6}", pi0_is(&sample, &event)?.estimate);
    println!(
        "  pi1_is = {:.6}",
        pi1_is(&sample, &event, Some(&design))?.estimate
    );
    Ok(())
}
