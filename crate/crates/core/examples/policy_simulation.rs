//! Monte-Carlo value of the feedback policy against the PDE value, and a
//! comparison with distorted policies.
//!
//! ```sh
//! cargo run --release --example policy_simulation
//! ```

use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{solve_penalized, GridSpec};
use reindiv::policy::{simulate, simulate_paths, simulate_suboptimal, SimConfig};

fn main() -> reindiv::Result<()> {
    let dist = ClaimDistribution::point_mass(1.0)?;
    let params = ModelParams::new(0.25, 0.1, 1.0)?;
    let field = solve_penalized(&dist, &params, &GridSpec::new(2048, 1024, 0.01))?;

    let cfg = SimConfig::new(20_000, 42, 0.75, 0.0);
    let run = simulate(&field, &cfg)?;
    println!(
        "x0 = 0.75, t0 = 0: estimate {:.5} +- {:.5}, PDE {:.5}, ruined {} of {}",
        run.estimate, run.stderr, run.pde_value, run.n_ruined, run.n_paths
    );

    for delta in [0.25, 0.5, 1.0] {
        let other = simulate_suboptimal(&field, &cfg, delta)?;
        println!("  distortion {delta}: {:.5} +- {:.5}", other.estimate, other.stderr);
    }

    let (_, paths) = simulate_paths(&field, &SimConfig::new(1000, 7, 0.3, 0.5), 0.0)?;
    let ruined: Vec<f64> = paths.iter().filter_map(|p| p.theta).collect();
    let mean_theta = ruined.iter().sum::<f64>() / ruined.len().max(1) as f64;
    println!("x0 = 0.3, t0 = 0.5: {} of 1000 ruined, mean ruin time {mean_theta:.3}", ruined.len());
    Ok(())
}
