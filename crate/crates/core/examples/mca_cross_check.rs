//! Compare the PDE value with the Markov-chain approximation on a coarse lattice.
//!
//! ```sh
//! cargo run --release --example mca_cross_check
//! ```

use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{mca_oracle, solve_penalized, GridSpec, McaOptions};

fn main() -> reindiv::Result<()> {
    let dist = ClaimDistribution::uniform(2.0)?;
    let params = ModelParams::new(0.3, 0.1, 1.0)?;
    let field = solve_penalized(&dist, &params, &GridSpec::new(1024, 512, 0.01))?;

    for levels in [32, 64, 128] {
        let table = mca_oracle(&dist, &params, &McaOptions { levels, controls: 16, top: None });
        let mut worst = 0.0f64;
        for x in [0.25, 0.75, 1.5] {
            for tau in [0.25, 0.5, 1.0] {
                let v = field.v_at(x, tau);
                worst = worst.max((table.value_at(x, tau) - v).abs() / v);
            }
        }
        println!("{levels:>4} levels on [0, {:.3}]: worst relative gap {:.3}%", table.top(), 100.0 * worst);
    }
    Ok(())
}
