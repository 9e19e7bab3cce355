//! Estimating a mean `μ = Σ p X` with the inclusion-weighted estimator and a
//! centering constant `ξ`.
//!
//! cargo run --example mean_estimation

use probest::estimators::{mu1, mu1_variance, optimal_xi, MeanProblem};
use probest::harness::replication_rng;
use probest::DiscreteDistribution;

fn main() -> probest::Result<()> {
    let dist = DiscreteDistribution::from_weights(&[0.5, 0.3, 0.2])?;
    let problem = MeanProblem::from_slice(&dist, &[1.0, 2.0, 3.0], 0.0)?;
    println!("mu = {}", problem.mean(&dist)?);

    println!("\n   n   var(xi=0)    var(xi=mu)   xi*     var(xi*)");
    let mu = problem.mean(&dist)?;
    for n in [1, 2, 5, 10, 20, 50] {
        let xi = optimal_xi(&dist, &problem, n)?;
        println!(
            "{n:>4}  {:.4e}  {:.4e}  {xi:.4}  {:.4e}",
            mu1_variance(&dist, &problem, n)?,
            mu1_variance(&dist, &problem.with_xi(mu), n)?,
            mu1_variance(&dist, &problem.with_xi(xi), n)?
        );
    }

    let mut rng = replication_rng(1, 0, 0);
    let sample = dist.sample(10, &mut rng)?;
    let xi = optimal_xi(&dist, &problem, 10)?;
    let report = mu1(&sample, &problem.with_xi(xi))?;
    println!("\none sample of 10: mu1 = {:.6}", report.estimate);
    Ok(())
}
