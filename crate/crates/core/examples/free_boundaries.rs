//! Extract the dividend barrier and reinsurance boundaries, then classify points.
//!
//! ```sh
//! cargo run --release --example free_boundaries
//! ```

use reindiv::boundaries::{
    ceded_loss, check_discrete_boundaries, classify, discrete_claim_boundaries, FreeBoundaries, DEFAULT_TOL_FB,
};
use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{solve_penalized, GridSpec};

fn main() -> reindiv::Result<()> {
    let dist = ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.7)])?;
    let params = ModelParams::new(0.2, 0.1, 1.0)?;
    let field = solve_penalized(&dist, &params, &GridSpec::new(1024, 1024, 0.01))?;
    let inv_lambda = 1.0 / field.lambda;
    println!("lambda = {:.6}, claims below {inv_lambda:.4} are never ceded", field.lambda);

    let levels = [0.5, 1.0, 2.0, 3.0];
    let fb = FreeBoundaries::extract(&field, &levels, DEFAULT_TOL_FB)?;
    println!("dividend barrier (max isotonic correction {:.2e}):", fb.dividend.max_violation);
    for tau in [0.05, 0.25, 0.5, 1.0] {
        println!("  d({tau:.2}) = {:.4}", fb.dividend.at(tau));
    }
    for (z, k) in fb.reinsurance() {
        println!("  K(T; z = {z}) = {:.4}", k[k.len() - 1]);
    }

    let atoms = discrete_claim_boundaries(&field)?;
    println!("first ceded atom: {:?}", atoms.first_ceded.map(|j| atoms.atoms[j]));
    for report in [fb.check(&field), check_discrete_boundaries(&field, &atoms)] {
        for s in &report.suites {
            println!("  {:<40} {}", s.name, if s.passed { "ok" } else { "FAILED" });
        }
    }

    let tau = params.horizon;
    let d = fb.dividend.at(tau);
    for x in [0.05, 0.5 * d, 0.95 * d, 1.1 * d] {
        let region = classify(&field, x, tau, 2.0);
        let ceded = ceded_loss(&field, x, tau, 2.0).map(|c| format!("{c:.4}")).unwrap_or("-".into());
        println!("x = {x:.3}: {}, ceded part of a claim of 2 = {ceded}", region.as_str());
    }
    Ok(())
}
