use std::sync::OnceLock;

use proptest::prelude::*;
use reindiv::boundaries::{
    ceded_loss, classify, dividend_level, extract_dividend_boundary, extract_reinsurance_boundary,
    ratio_diagnostics, reinsurance_level, Region, DEFAULT_TOL_FB,
};
use reindiv::claims::{ClaimDistribution, ModelParams};
use reindiv::pde::{solve_penalized, trivial_solution, GridSpec, SolutionField};
use reindiv::Error;

fn exponential() -> &'static SolutionField {
    static FIELD: OnceLock<SolutionField> = OnceLock::new();
    FIELD.get_or_init(|| {
        let d = ClaimDistribution::exponential(1.0).unwrap();
        let p = ModelParams::new(0.3, 0.1, 1.0).unwrap();
        solve_penalized(&d, &p, &GridSpec::new(512, 256, 0.01)).unwrap()
    })
}

fn point_mass_fine() -> &'static SolutionField {
    static FIELD: OnceLock<SolutionField> = OnceLock::new();
    FIELD.get_or_init(|| {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        solve_penalized(&d, &p, &GridSpec::new(4096, 256, 0.01)).unwrap()
    })
}

/// Barrier values at arbitrary `tau`, interpolated from the row vectors the
/// same way `classify` does.
fn levels_at(f: &SolutionField, tau: f64, z: f64) -> (f64, f64) {
    let g = &f.grid;
    let pos = (tau / g.dtau).min(g.nt as f64);
    let n = (pos.floor() as usize).min(g.nt - 1);
    let w = pos - n as f64;
    let d = dividend_level(f, n, DEFAULT_TOL_FB) * (1.0 - w) + dividend_level(f, n + 1, DEFAULT_TOL_FB) * w;
    let k = reinsurance_level(f, n, z) * (1.0 - w) + reinsurance_level(f, n + 1, z) * w;
    (d, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn regions_partition_the_surplus_axis(xf in 0.0f64..1.0, tau in 0.0f64..1.0, z in 0.05f64..6.0) {
        let f = exponential();
        let x = xf * f.grid.length;
        let (d, k) = levels_at(f, tau, z);
        let expected = if x >= d {
            Region::DividendPayout
        } else if x < k {
            Region::ReinsuranceCovered
        } else {
            Region::NonAction
        };
        prop_assert_eq!(classify(f, x, tau, z), expected);
        prop_assert!(k <= d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ceded_loss_properties(xf in 0.0f64..0.999, tau in 0.05f64..1.0, z in 0.05f64..6.0, dz in 0.0f64..2.0) {
        let f = exponential();
        let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();
        let x = xf * d.raw[(tau / f.grid.dtau) as usize].min(d.raw[(tau / f.grid.dtau) as usize + 1]);
        let ceded = ceded_loss(f, x, tau, z).unwrap();
        prop_assert!(ceded >= 0.0 && ceded < z);
        prop_assert!(ceded <= (z - 1.0 / f.lambda).max(0.0) + 1e-12);
        prop_assert!(ceded_loss(f, x, tau, z + dz).unwrap() >= ceded);
    }
}

#[test]
fn classify_reference_points() {
    let f = exponential();
    let inv_lambda = 1.0 / f.lambda;
    for tau in [0.0, 0.3, 1.0] {
        assert_eq!(classify(f, f.grid.length, tau, 2.0), Region::DividendPayout);
    }
    let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();
    let mid = d.at(0.7) * 0.5;
    assert_eq!(classify(f, mid, 0.7, inv_lambda), Region::NonAction);
    assert_eq!(classify(f, mid, 0.7, 0.5 * inv_lambda), Region::NonAction);
    assert_eq!(classify(f, 1e-6, 0.7, 2.0 * inv_lambda), Region::ReinsuranceCovered);
    assert!(extract_reinsurance_boundary(f, inv_lambda).iter().all(|&k| k == 0.0));
}

#[test]
fn ceded_loss_at_the_ruin_boundary_and_in_payout_region() {
    let f = exponential();
    for z in [0.3, 1.0, 3.0] {
        let ceded = ceded_loss(f, 0.0, 0.6, z).unwrap();
        assert!((ceded - (z - 1.0 / f.lambda).max(0.0)).abs() < 1e-12);
    }
    assert!(matches!(ceded_loss(f, f.grid.length, 0.6, 2.0), Err(Error::OutOfRegion { .. })));
}

#[test]
fn ceded_loss_slope_in_covered_region() {
    let f = exponential();
    let (z, tau) = (3.0, 0.8);
    let k = levels_at(f, tau, z).1;
    let c = f.params.c;
    let h = f.grid.dx;
    let mut x = h;
    while x + h < k {
        let slope = (ceded_loss(f, x + h, tau, z).unwrap() - ceded_loss(f, x, tau, z).unwrap()) / h;
        assert!(slope <= -2.0 * c + 1e-6, "slope {slope} at x = {x}");
        x += h;
    }
}

#[test]
fn ratio_is_monotone_and_cap_grows_fast_enough() {
    let f = exponential();
    let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();
    let diag = ratio_diagnostics(f, &d, 0.0);
    assert!(diag.max_increase <= 1e-6, "{diag:?}");
    assert!(diag.min_cap_slope >= 2.0 * f.params.c - 1e-6, "{diag:?}");
}

#[test]
fn ratio_at_zero_equals_lambda_once_resolved() {
    let f = point_mass_fine();
    let d = extract_dividend_boundary(f, DEFAULT_TOL_FB).unwrap();
    let diag = ratio_diagnostics(f, &d, 0.1);
    assert!(diag.boundary_rel_error <= 5e-3, "{diag:?}");
}

#[test]
fn trivial_regime_has_no_boundaries() {
    let d = ClaimDistribution::exponential(1.0).unwrap();
    let p = ModelParams::new(1.0, 0.1, 1.0).unwrap();
    let f = trivial_solution(&d, &p, &GridSpec::new(64, 64, 0.01)).unwrap();
    let b = extract_dividend_boundary(&f, DEFAULT_TOL_FB).unwrap();
    assert!(b.raw.iter().all(|&x| x == 0.0));
    assert!(extract_reinsurance_boundary(&f, 5.0).iter().all(|&k| k == 0.0));
    assert_eq!(classify(&f, 0.5, 0.5, 5.0), Region::DividendPayout);
}
