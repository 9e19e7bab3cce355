//! Exact moments of estimators by summing over every ordered sample tuple.
//!
//! cargo run --release --example enumeration_oracle

use probest::estimators::{pi0_max, pi1, pi2, v1_exact, v1_hat};
use probest::oracle::{estimator_moments, EnumerationBudget};
use probest::{DiscreteDistribution, Event, OutcomeId};

fn main() -> probest::Result<()> {
    let dist = DiscreteDistribution::from_weights(&[0.5, 0.3, 0.2])?;
    let event = Event::new([0, 1].map(OutcomeId));
    let budget = EnumerationBudget::default();

    println!("   n  E[pi1]-pi   Var[pi1]-v1   E[v1_hat]-v1  bias(pi0_max)  bias(pi2)");
    for n in 1..=6 {
        let p1 = estimator_moments(&dist, None, &event, n, &budget, |s, a| {
            Ok(pi1(s, a)?.estimate)
        })?;
        let vh = estimator_moments(&dist, None, &event, n, &budget, v1_hat)?;
        let mx = estimator_moments(&dist, None, &event, n, &budget, |s, a| {
            Ok(pi0_max(s, a)?.estimate)
        })?;
        let h = estimator_moments(&dist, None, &event, n, &budget, |s, a| {
            Ok(pi2(s, a)?.estimate)
        })?;
        let v1 = v1_exact(&dist, &event, n);
        println!(
            "{n:>4}  {:+.2e}   {:+.2e}     {:+.2e}      {:+.4}        {:+.4}",
            p1.bias,
            p1.variance - v1,
            vh.mean - v1,
            mx.bias,
            h.bias
        );
    }
    Ok(())
}
