//! The harmonic-mean estimator `m k / Σ 1/p` for an event of known size, with
//! its jackknife variance estimate and the large-`k` variance.
//!
//! cargo run --example harmonic_mean

use probest::estimators::{pi2_with, v2_exact, v2_jackknife, JackknifeForm};
use probest::harness::replication_rng;
use probest::oracle::exact_pi;
use probest::{DiscreteDistribution, Event, OutcomeId};

fn main() -> probest::Result<()> {
    let dist = DiscreteDistribution::from_weights(&[0.3, 0.2, 0.1, 0.4])?;
    let event = Event::new([0, 1, 2].map(OutcomeId));
    println!("pi = {}", exact_pi(&dist, &event));

    let mut rng = replication_rng(3, 0, 0);
    for n in [10, 100, 1000, 10_000] {
        let sample = dist.sample(n, &mut rng)?;
        let report = pi2_with(&sample, &event, JackknifeForm::Exact)?;
        let large_k = v2_jackknife(&sample, &event, JackknifeForm::LargeK)?;
        let exact = v2_exact(&dist, &event, report.k as u64)?;
        println!(
            "n={n:>6} k={:>5}  pi2 = {:.6}  jackknife {:.3e}  large-k {:.3e}  exact {:.3e}",
            report.k,
            report.estimate,
            report.variance_estimate.unwrap_or(f64::NAN),
            large_k,
            exact
        );
    }

    // equal probabilities inside A leave nothing to vary
    let flat = DiscreteDistribution::from_weights(&[0.2, 0.2, 0.2, 0.4])?;
    let sample = flat.sample(50, &mut rng)?;
    println!(
        "\nequal-probability event: jackknife = {}",
        v2_jackknife(&sample, &event, JackknifeForm::Exact)?
    );
    Ok(())
}
