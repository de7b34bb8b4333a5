use std::sync::OnceLock;

use reindiv::boundaries::{extract_dividend_boundary, DEFAULT_TOL_FB};
use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{solve_penalized, GridSpec, SolutionField};
use reindiv::policy::{feedback_coefficients, simulate, simulate_paths, SimConfig};

fn point_mass() -> &'static SolutionField {
    static FIELD: OnceLock<SolutionField> = OnceLock::new();
    FIELD.get_or_init(|| {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        solve_penalized(&d, &p, &GridSpec::new(1024, 512, 0.01)).unwrap()
    })
}

#[test]
fn coefficients_between_boundary_values() {
    let f = point_mass();
    let a_lambda = f.dist.retained_a(f.lambda);
    let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();

    let (drift, var) = feedback_coefficients(f, 1e-9, 0.5).unwrap();
    assert!((drift - f.lambda * a_lambda).abs() < 1e-12);
    assert!(drift > 0.0);
    assert!((var - 2.0 * a_lambda).abs() < 1e-12);

    // Bounded claims: next to the barrier the ratio is below 1/z_max, so the
    // whole claim is retained.
    let x = d.at(1.0) - 2.0 * f.grid.dx;
    let (drift, var) = feedback_coefficients(f, x, 1.0).unwrap();
    assert!((drift - (f.dist.mu1() - f.params.gamma)).abs() < 1e-12);
    assert!((var - f.dist.mu2()).abs() < 1e-12);

    for k in 1..40 {
        let x = d.at(0.8) * k as f64 / 40.0;
        let (_, var) = feedback_coefficients(f, x, 0.8).unwrap();
        assert!(var >= 2.0 * a_lambda - 1e-12 && var <= f.dist.mu2() + 1e-12);
    }
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let f = point_mass();
    let cfg = SimConfig::new(2000, 99, 0.6, 0.2);
    let (a, pa) = simulate_paths(f, &cfg, 0.0).unwrap();
    let (b, pb) = simulate_paths(f, &cfg, 0.0).unwrap();
    assert_eq!(a, b);
    assert_eq!(pa, pb);
    let other = simulate(f, &SimConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(other.estimate, a.estimate);
}

#[test]
fn lump_sum_above_the_barrier_is_certain() {
    let f = point_mass();
    let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();
    let x0 = 4.0;
    let run = simulate(f, &SimConfig::new(2000, 5, x0, 0.5)).unwrap();
    assert!(run.estimate >= x0 - d.at(0.5) - 3.0 * run.stderr);
    assert!(run.estimate >= 0.0);
}

#[test]
fn ruined_paths_pay_nothing_afterwards() {
    let f = point_mass();
    let (_, paths) = simulate_paths(f, &SimConfig::new(4000, 8, 0.2, 0.0), 0.0).unwrap();
    let ruined: Vec<_> = paths.iter().filter(|p| p.theta.is_some()).collect();
    assert!(!ruined.is_empty());
    for p in ruined {
        assert!(p.final_surplus <= 0.0);
        assert!(p.theta.unwrap() <= 1.0);
    }
}

#[test]
fn small_run_agrees_with_the_value_function() {
    let f = point_mass();
    let run = simulate(f, &SimConfig::new(20_000, 2024, 0.75, 0.5)).unwrap();
    let allowed = 3.0 * run.stderr + 0.02 * run.pde_value;
    assert!((run.estimate - run.pde_value).abs() <= allowed, "{run:?}");
}
