//! Retained-claim moments and the boundary ratio `lambda` for a few claim laws.
//!
//! ```sh
//! cargo run --example claims_calculus
//! ```

use reindiv::claims::{drift_f, lambda_root, optimal_retention, ClaimDistribution, ModelParams};

fn main() -> reindiv::Result<()> {
    let laws = [
        ("point mass z=1", ClaimDistribution::point_mass(1.0)?),
        ("exponential mean 1", ClaimDistribution::exponential(1.0)?),
        ("uniform on [0, 2]", ClaimDistribution::uniform(2.0)?),
        ("discrete {0.5, 2.0}", ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.7)])?),
    ];
    let params = ModelParams::new(0.25, 0.1, 1.0)?;

    for (name, dist) in &laws {
        let lambda = lambda_root(dist, &params)?;
        println!("{name}: mu1 = {:.4}, mu2 = {:.4}, lambda = {lambda:.10}", dist.mu1(), dist.mu2());
        println!("  {:>6} {:>12} {:>12} {:>12}", "y", "A(y)", "B(y)", "f(y)");
        for y in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let (a, b) = dist.retained(y);
            println!("  {y:>6.2} {a:>12.6} {b:>12.6} {:>12.6}", drift_f(dist, &params, y));
        }
    }

    // At y = lambda a claim of size z is retained up to 1/lambda.
    let dist = &laws[0].1;
    let lambda = lambda_root(dist, &params)?;
    for z in [0.2, 0.5, 1.0] {
        println!("z = {z}: retained {:.3} at y = lambda", optimal_retention(z, lambda));
    }

    // Premium rate above the mean claim: no reinsurance or dividend boundary exists.
    let rich = ModelParams::new(1.2, 0.1, 1.0)?;
    println!("gamma = 1.2: trivial regime = {}", rich.is_trivial(dist));
    Ok(())
}
