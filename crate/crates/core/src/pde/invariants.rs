//! Runtime checks of the monotonicity and comparison properties a converged
//! field must have.

use serde::Serialize;

use super::bounds::{ComparisonBounds, GrowthBound};
use super::SolutionField;

pub const DEFAULT_TOL_INV: f64 = 1e-6;

/// Outcome of one named check. `worst_defect` is the largest violation
/// found (zero when the property holds everywhere).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub worst_defect: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn new(name: impl Into<String>, worst_defect: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst_defect <= tolerance,
            worst_defect,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub suites: Vec<SuiteResult>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn first_failure(&self) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| !s.passed)
    }

    pub fn get(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn push(&mut self, suite: SuiteResult) {
        self.suites.push(suite);
    }
}

/// Evaluate every field invariant, skipping the corner `tau < 2 eps, x < 2 eps`
/// where the initial and boundary data disagree.
///
/// Discrete derivatives: forward difference for `lambda u + u_x`, standard
/// second difference for `u_xx`.
pub fn check_invariants(field: &SolutionField, tol: f64) -> InvariantReport {
    let g = field.grid;
    let (nx, nt) = (g.nx, g.nt);
    let u = &field.u;
    let v = &field.v;
    let lambda = field.lambda;
    let cmp = ComparisonBounds::new(&field.dist, &field.params);
    let growth = (!field.is_trivial()).then(|| GrowthBound::new(&field.dist, &field.params, lambda, g.length));

    let mut lower = 0.0f64;
    let mut mono_x = 0.0f64;
    let mut mono_tau = 0.0f64;
    let mut mixed = 0.0f64;
    let mut convex = 0.0f64;
    let mut growth_defect = 0.0f64;
    let mut u_hat = 0.0f64;
    let mut v_hat = 0.0f64;
    let mut v_floor = 0.0f64;
    let mut v_exact = 0.0f64;

    for n in 0..=nt {
        let tau = g.tau(n);
        v_exact = v_exact.max(v[[n, 0]].abs());
        for i in 0..=nx {
            let x = g.x(i);
            if n == 0 {
                v_exact = v_exact.max((v[[0, i]] - x).abs());
            }
            if g.in_corner(i, n) {
                continue;
            }
            let ui = u[[n, i]];
            lower = lower.max(1.0 - ui);
            u_hat = u_hat.max(ui - cmp.u_hat(x));
            v_hat = v_hat.max(v[[n, i]] - cmp.v_hat(x));
            v_floor = v_floor.max(x - v[[n, i]]);
            if let Some(gb) = &growth {
                growth_defect = growth_defect.max(ui - gb.at(x, tau));
            }
            if n < nt && !g.in_corner(i, n + 1) {
                mono_tau = mono_tau.max(ui - u[[n + 1, i]]);
            }
            if i < nx && !g.in_corner(i + 1, n) {
                let du = u[[n, i + 1]] - ui;
                mono_x = mono_x.max(du);
                if !field.is_trivial() {
                    mixed = mixed.max(-(lambda * ui + du / g.dx));
                }
            }
            if i > 0 && i < nx && !g.in_corner(i - 1, n) {
                let d2 = (u[[n, i + 1]] - 2.0 * ui + u[[n, i - 1]]) / (g.dx * g.dx);
                convex = convex.max(-d2);
            }
        }
    }

    let mut report = InvariantReport::default();
    report.push(SuiteResult::new("u_lower_bound", lower, tol));
    report.push(SuiteResult::new("u_nonincreasing_in_x", mono_x, tol));
    report.push(SuiteResult::new("u_nondecreasing_in_tau", mono_tau, tol));
    report.push(SuiteResult::new("mixed_boundary_sign", mixed, tol));
    report.push(SuiteResult::new("u_convex_in_x", convex, tol));
    if growth.is_some() {
        report.push(SuiteResult::new("u_growth_bound", growth_defect, tol));
    }
    report.push(SuiteResult::new("u_gradient_supersolution", u_hat, tol));
    report.push(SuiteResult::new("v_value_supersolution", v_hat, tol));
    report.push(SuiteResult::new("v_dominates_payout", v_floor, tol));
    report.push(SuiteResult::new("v_boundary_and_initial", v_exact, 0.0));
    report
}
