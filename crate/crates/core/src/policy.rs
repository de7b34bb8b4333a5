//! Forward simulation of the feedback policy read off a solved field.
//!
//! Calendar time `s` runs from `t0` to `T`; the field is indexed by time to
//! go `tau = T - s`. Between Euler steps the surplus moves with the drift and
//! variance of the optimally reinsured claim stream, and after each step
//! anything above the dividend barrier is paid out (the discrete analogue of
//! reflection). Whatever is left at `T` is paid as the terminal dividend.
//!
//! Ruin is checked after every increment, including the chance that the
//! Brownian bridge between two positive end points touched zero in between.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundaries::{extract_dividend_boundary, DividendBoundary, DEFAULT_TOL_FB};
use crate::error::{Error, Result};
use crate::pde::SolutionField;

/// Name of the per-path generator, recorded in every run.
pub const RNG_ALGORITHM: &str = "chacha8 (seed_from_u64, stream = path id)";

/// Steps per horizon when `dt` is not given.
pub const DEFAULT_STEPS: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Euler step; `None` means `T / 2000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub seed: u64,
    pub x0: f64,
    /// Calendar start time in `[0, T]`; the run covers `tau = T - t0`.
    #[serde(default)]
    pub t0: f64,
}

impl SimConfig {
    pub fn new(n_paths: usize, seed: u64, x0: f64, t0: f64) -> Self {
        Self {
            n_paths,
            dt: None,
            seed,
            x0,
            t0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn resolved_dt(&self, horizon: f64) -> f64 {
        self.dt.unwrap_or(horizon / DEFAULT_STEPS)
    }

    /// Checks against the grid of the field that will drive the run.
    pub fn validate(&self, field: &SolutionField) -> Result<()> {
        let g = &field.grid;
        if self.n_paths < 100 {
            return Err(Error::invalid("simulation.n_paths", format!("need at least 100 paths, got {}", self.n_paths)));
        }
        let dt = self.resolved_dt(g.horizon);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("simulation.dt", format!("must be positive, got {dt}")));
        }
        if dt > g.dtau * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "simulation.dt",
                format!("must not exceed the grid time step {:.6e}, got {dt:.6e}", g.dtau),
            ));
        }
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return Err(Error::invalid("simulation.x0", format!("must be finite and > 0, got {}", self.x0)));
        }
        if !(self.t0 >= 0.0 && self.t0 <= g.horizon) {
            return Err(Error::invalid("simulation.t0", format!("must lie in [0, {}], got {}", g.horizon, self.t0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRun {
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    /// `v(x0, T - t0)` interpolated from the field.
    pub pde_value: f64,
    pub seed: u64,
    /// Step actually used (the horizon is split into whole steps).
    pub dt: f64,
    pub rng: &'static str,
}

/// Outcome of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOutcome {
    pub path_id: u64,
    /// Calendar ruin time, if the path was absorbed before `T`.
    pub theta: Option<f64>,
    /// Discounted dividends, including the initial lump and the terminal payout.
    pub payout: f64,
    /// Surplus when the path stopped (before the terminal payout).
    pub final_surplus: f64,
}

/// Drift `-gamma + B(y)` and variance `2 A(y)` of the surplus at `(x, tau)`
/// under the optimal retention `min(z, 1/y)`.
pub fn feedback_coefficients(field: &SolutionField, x: f64, tau: f64) -> Result<(f64, f64)> {
    let d = extract_dividend_boundary(field, DEFAULT_TOL_FB)?.at(tau);
    if !(x > 0.0 && x < d) {
        return Err(Error::OutOfRegion { x, tau, boundary: d });
    }
    Ok(coefficients(field, x, tau, 1.0))
}

fn coefficients(field: &SolutionField, x: f64, tau: f64, cap_scale: f64) -> (f64, f64) {
    let y = if x < field.grid.dx { field.lambda } else { field.y_at(x, tau) };
    let (a, b) = field.dist.retained(y / cap_scale);
    (b - field.params.gamma, 2.0 * a)
}

pub fn simulate(field: &SolutionField, cfg: &SimConfig) -> Result<PolicyRun> {
    simulate_paths(field, cfg, 0.0).map(|(run, _)| run)
}

/// Same run with the retention cap `1/y` stretched by `1 + distortion` and
/// the dividend barrier raised by `distortion * x2`.
pub fn simulate_suboptimal(field: &SolutionField, cfg: &SimConfig, distortion: f64) -> Result<PolicyRun> {
    if !(distortion.is_finite() && distortion >= 0.0) {
        return Err(Error::invalid("distortion", format!("must be finite and >= 0, got {distortion}")));
    }
    simulate_paths(field, cfg, distortion).map(|(run, _)| run)
}

/// Runs every path and returns the summary together with per-path outcomes.
pub fn simulate_paths(field: &SolutionField, cfg: &SimConfig, distortion: f64) -> Result<(PolicyRun, Vec<PathOutcome>)> {
    cfg.validate(field)?;
    let horizon = field.grid.horizon;
    let span = horizon - cfg.t0;
    let steps = (span / cfg.resolved_dt(horizon)).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { span / steps as f64 };
    let dividend = extract_dividend_boundary(field, DEFAULT_TOL_FB)?;
    let shift = distortion * field.bounds().x2;

    // Barrier and discount factor at the end of each step are shared by all paths.
    let barrier_at = |tau: f64| barrier(&dividend, tau, shift);
    let ends: Vec<(f64, f64, f64)> = (1..=steps)
        .map(|k| {
            let s = if k == steps { horizon } else { cfg.t0 + k as f64 * dt };
            let tau = horizon - s;
            (tau, barrier_at(tau), (-field.params.c * (s - cfg.t0)).exp())
        })
        .collect();
    let start = barrier_at(span);
    let cap_scale = 1.0 + distortion;
    let sqrt_dt = dt.sqrt();

    let paths: Vec<PathOutcome> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path_id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path_id);
            let mut r = cfg.x0;
            let mut payout = (r - start).max(0.0);
            r = r.min(start);
            let mut theta = (r <= 0.0 && steps > 0).then_some(cfg.t0);
            let mut tau = span;
            for (k, &(tau_next, d, disc)) in ends.iter().enumerate().take(if theta.is_some() { 0 } else { steps }) {
                let (drift, var) = coefficients(field, r, tau, cap_scale);
                let z: f64 = StandardNormal.sample(&mut rng);
                let prev = r;
                r += drift * dt + var.max(0.0).sqrt() * sqrt_dt * z;
                // A bridge between two positive endpoints still dips below
                // zero with probability exp(-2 r0 r1 / (var dt)).
                let crossed = r <= 0.0 || {
                    let q = (-2.0 * prev * r / (var * dt)).exp();
                    q > 1e-12 && rng.random::<f64>() < q
                };
                if crossed {
                    r = r.min(0.0);
                    let s = if k + 1 == steps { horizon } else { cfg.t0 + (k + 1) as f64 * dt };
                    theta = Some(s);
                    break;
                }
                if k + 1 == steps {
                    payout += r * disc;
                    break;
                }
                if r > d {
                    payout += (r - d) * disc;
                    r = d;
                }
                tau = tau_next;
            }
            PathOutcome {
                path_id,
                theta,
                payout,
                final_surplus: r,
            }
        })
        .collect();

    let values: Vec<f64> = paths.iter().map(|p| p.payout).collect();
    let n = values.len() as f64;
    // Summing deviations from the first value keeps constant samples exact.
    let pivot = values.first().copied().unwrap_or(0.0);
    let deviations: Vec<f64> = values.iter().map(|v| v - pivot).collect();
    let estimate = pivot + pairwise_sum(&deviations) / n;
    let squares: Vec<f64> = values.iter().map(|v| (v - estimate) * (v - estimate)).collect();
    let variance = pairwise_sum(&squares) / (n - 1.0);
    let run = PolicyRun {
        estimate,
        stderr: (variance / n).sqrt(),
        n_paths: cfg.n_paths,
        n_ruined: paths.iter().filter(|p| p.theta.is_some()).count(),
        pde_value: field.v_at(cfg.x0, span),
        seed: cfg.seed,
        dt,
        rng: RNG_ALGORITHM,
    };
    Ok((run, paths))
}

fn barrier(dividend: &DividendBoundary, tau: f64, shift: f64) -> f64 {
    let d = dividend.at(tau);
    // The barrier is a payout region only where one exists at all.
    if d > 0.0 {
        d + shift
    } else {
        d
    }
}

/// Fixed-shape pairwise summation, independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::{ClaimDistribution, ModelParams};
    use crate::pde::{solve_penalized, trivial_solution, GridSpec};

    fn point_mass_field() -> SolutionField {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        solve_penalized(&d, &p, &GridSpec::new(256, 128, 0.02)).unwrap()
    }

    #[test]
    fn pairwise_matches_naive_sum_of_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn trivial_regime_pays_everything_at_once() {
        let d = ClaimDistribution::exponential(1.0).unwrap();
        let p = ModelParams::new(1.2, 0.1, 1.0).unwrap();
        let f = trivial_solution(&d, &p, &GridSpec::new(64, 64, 0.02)).unwrap();
        for t0 in [0.0, 0.5] {
            let run = simulate(&f, &SimConfig::new(200, 7, 1.7, t0)).unwrap();
            assert_eq!(run.estimate, 1.7);
            assert_eq!(run.stderr, 0.0);
            assert_eq!(run.n_ruined, 200);
            assert_eq!(simulate_suboptimal(&f, &SimConfig::new(200, 7, 1.7, t0), 0.5).unwrap().estimate, 1.7);
        }
    }

    #[test]
    fn start_at_horizon_is_immediate_liquidation() {
        let f = point_mass_field();
        let run = simulate(&f, &SimConfig::new(100, 1, 0.8, 1.0)).unwrap();
        assert_eq!(run.estimate, 0.8);
        assert_eq!(run.dt, 0.0);
    }

    #[test]
    fn zero_distortion_reproduces_optimal_run() {
        let f = point_mass_field();
        let cfg = SimConfig::new(300, 11, 0.5, 0.5);
        let a = simulate(&f, &cfg).unwrap();
        let b = simulate_suboptimal(&f, &cfg, 0.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, simulate(&f, &cfg).unwrap());
    }

    #[test]
    fn ruined_paths_end_at_or_below_zero() {
        let f = point_mass_field();
        let (run, paths) = simulate_paths(&f, &SimConfig::new(500, 3, 0.1, 0.0), 0.0).unwrap();
        assert!(run.n_ruined > 0);
        for p in paths.iter().filter(|p| p.theta.is_some()) {
            assert!(p.final_surplus <= 0.0);
            assert!(p.payout >= 0.0);
        }
    }

    #[test]
    fn feedback_coefficients_at_the_ruin_boundary() {
        let f = point_mass_field();
        let (drift, var) = feedback_coefficients(&f, 1e-4, 0.5).unwrap();
        let a = f.dist.retained_a(f.lambda);
        assert!((drift - f.lambda * a).abs() < 1e-10);
        assert!((var - 2.0 * a).abs() < 1e-10);
        assert!(matches!(feedback_coefficients(&f, 5.0, 0.5), Err(Error::OutOfRegion { .. })));
    }

    #[test]
    fn config_validation() {
        let f = point_mass_field();
        assert!(SimConfig::new(99, 0, 1.0, 0.0).validate(&f).is_err());
        assert!(SimConfig::new(100, 0, 0.0, 0.0).validate(&f).is_err());
        assert!(SimConfig::new(100, 0, 1.0, 1.5).validate(&f).is_err());
        assert!(SimConfig::new(100, 0, 1.0, 0.0).with_dt(0.1).validate(&f).is_err());
        assert!(SimConfig::new(100, 0, 1.0, 0.0).validate(&f).is_ok());
    }
}
