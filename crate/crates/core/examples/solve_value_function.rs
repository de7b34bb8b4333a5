//! Solve the penalized obstacle problem and report invariants and residuals.
//!
//! ```sh
//! cargo run --release --example solve_value_function
//! ```

use std::time::Instant;

use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{check_invariants, hjb_residual, solve_penalized, GridSpec, DEFAULT_TOL_INV};

fn main() -> reindiv::Result<()> {
    let dist = ClaimDistribution::exponential(1.0)?;
    let params = ModelParams::new(0.3, 0.1, 1.0)?;
    let spec = GridSpec::new(1024, 512, 0.01);

    let start = Instant::now();
    let field = solve_penalized(&dist, &params, &spec)?;
    let g = &field.grid;
    println!(
        "solved {}x{} on [0, {:.3}] in {:.2?}, lambda = {:.6}, max Picard iterations = {}",
        g.nx,
        g.nt,
        g.length,
        start.elapsed(),
        field.lambda,
        field.max_picard_iterations()
    );

    let bounds = field.bounds();
    println!("comparison barrier x2 = {:.4}", bounds.x2);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "x", "v(x,T)", "v_hat(x)", "u(x,T)", "y(x,T)");
    for x in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let tau = params.horizon;
        println!(
            "{x:>6.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            field.v_at(x, tau),
            bounds.v_hat(x),
            field.u_at(x, tau),
            field.y_at(x, tau)
        );
    }

    let report = check_invariants(&field, DEFAULT_TOL_INV);
    for suite in &report.suites {
        let mark = if suite.passed { "ok" } else { "FAILED" };
        println!("  {:<32} {:>10.2e}  {mark}", suite.name, suite.worst_defect);
    }

    let (_, summary) = hjb_residual(&field);
    println!(
        "residual: complementarity {:.2e}, continuation {:.2e}, payout violation {:.2e}",
        summary.complementarity, summary.continuation, summary.payout_violation
    );
    Ok(())
}
