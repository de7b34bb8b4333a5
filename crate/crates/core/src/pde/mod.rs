//! Penalized gradient problem on a truncated space-time grid.
//!
//! The solver works with `u = v_x`, which satisfies an obstacle problem
//! `min{u_t - T u, u - 1} = 0` with a Robin condition at the ruin boundary.
//! The obstacle is replaced by the penalty `beta_eps(u - 1)`, each time level
//! is marched implicitly with Picard iteration on the frozen nonlinear
//! coefficients, and `v` is recovered by integrating `u` in space.

mod bounds;
mod invariants;
mod mca;
mod penalty;
mod residual;
mod solver;
mod tridiag;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::claims::{ClaimDistribution, ModelParams};
use crate::error::{Error, Result};

pub use bounds::{ComparisonBounds, GrowthBound};
pub use invariants::{check_invariants, InvariantReport, SuiteResult, DEFAULT_TOL_INV};
pub use mca::{mca_oracle, McaOptions, McaTable};
pub use penalty::{boundary_smoother, penalty_beta, penalty_beta_prime};
pub use residual::{hjb_residual, ResidualSummary};
pub use solver::{integrate_value, solve_penalized, trivial_solution, PenaltySolver, SolverOptions};
pub use tridiag::solve_tridiagonal;

/// Minimum number of cells in either direction.
pub const MIN_CELLS: usize = 64;

/// Default truncation as a multiple of the dividend-boundary bound `x2`.
pub const DEFAULT_LENGTH_FACTOR: f64 = 1.25;

/// User-facing grid request; `length = None` selects `1.25 * x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Nt")]
    pub nt: usize,
    pub epsilon: f64,
}

impl GridSpec {
    pub fn new(nx: usize, nt: usize, epsilon: f64) -> Self {
        Self {
            length: None,
            nx,
            nt,
            epsilon,
        }
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = Some(length);
        self
    }
}

/// Resolved uniform grid on `[0, L] x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub length: f64,
    pub nx: usize,
    pub nt: usize,
    pub epsilon: f64,
    pub horizon: f64,
    pub dx: f64,
    pub dtau: f64,
}

impl Grid {
    pub fn new(spec: &GridSpec, dist: &ClaimDistribution, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let x2 = ComparisonBounds::new(dist, params).x2;
        let length = match spec.length {
            Some(l) => {
                if !(l.is_finite() && l > x2) {
                    return Err(Error::invalid(
                        "grid.L",
                        format!("truncation must exceed the dividend bound x2 = {x2:.6}, got {l}"),
                    ));
                }
                l
            }
            None => DEFAULT_LENGTH_FACTOR * x2,
        };
        if spec.nx < MIN_CELLS {
            return Err(Error::invalid("grid.Nx", format!("need at least {MIN_CELLS} cells, got {}", spec.nx)));
        }
        if spec.nt < MIN_CELLS {
            return Err(Error::invalid("grid.Nt", format!("need at least {MIN_CELLS} steps, got {}", spec.nt)));
        }
        if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
            return Err(Error::invalid("grid.epsilon", format!("must lie in (0, 1), got {}", spec.epsilon)));
        }
        Ok(Self {
            length,
            nx: spec.nx,
            nt: spec.nt,
            epsilon: spec.epsilon,
            horizon: params.horizon,
            dx: length / spec.nx as f64,
            dtau: params.horizon / spec.nt as f64,
        })
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            self.length
        } else {
            i as f64 * self.dx
        }
    }

    #[inline]
    pub fn tau(&self, n: usize) -> f64 {
        if n == self.nt {
            self.horizon
        } else {
            n as f64 * self.dtau
        }
    }

    /// Cell index and weight for linear interpolation at `x`, clamped to `[0, L]`.
    #[inline]
    pub(crate) fn locate_x(&self, x: f64) -> (usize, f64) {
        locate(x, self.dx, self.nx)
    }

    #[inline]
    pub(crate) fn locate_tau(&self, tau: f64) -> (usize, f64) {
        locate(tau, self.dtau, self.nt)
    }

    /// True inside the excluded corner `tau < 2 eps, x < 2 eps`.
    #[inline]
    pub fn in_corner(&self, i: usize, n: usize) -> bool {
        let guard = 2.0 * self.epsilon;
        self.tau(n) < guard && self.x(i) < guard
    }
}

#[inline]
fn locate(s: f64, h: f64, cells: usize) -> (usize, f64) {
    if s <= 0.0 {
        return (0, 0.0);
    }
    let pos = s / h;
    if pos >= cells as f64 {
        return (cells - 1, 1.0);
    }
    let k = (pos.floor() as usize).min(cells - 1);
    (k, pos - k as f64)
}

/// Picard statistics for one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

/// Grid functions of a completed solve, indexed `[n, i]` = `(tau_n, x_i)`.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub grid: Grid,
    pub dist: ClaimDistribution,
    pub params: ModelParams,
    /// Root of the drift function; zero in the trivial regime.
    pub lambda: f64,
    /// Approximation of `v_x`.
    pub u: Array2<f64>,
    /// `v(x, tau) = ∫_0^x u`.
    pub v: Array2<f64>,
    /// Risk ratio `-u_x / u` at every node.
    pub y: Array2<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
    trivial: bool,
}

impl SolutionField {
    /// True for the closed-form `v = x` solution of the `gamma >= mu1` regime.
    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn bounds(&self) -> ComparisonBounds {
        ComparisonBounds::new(&self.dist, &self.params)
    }

    fn bilinear(&self, table: &Array2<f64>, x: f64, tau: f64) -> f64 {
        let (i, wx) = self.grid.locate_x(x);
        let (n, wt) = self.grid.locate_tau(tau);
        let lo = table[[n, i]] * (1.0 - wx) + table[[n, i + 1]] * wx;
        let hi = table[[n + 1, i]] * (1.0 - wx) + table[[n + 1, i + 1]] * wx;
        lo * (1.0 - wt) + hi * wt
    }

    /// `u` interpolated bilinearly, clamped to the grid.
    pub fn u_at(&self, x: f64, tau: f64) -> f64 {
        if self.trivial {
            return 1.0;
        }
        self.bilinear(&self.u, x, tau)
    }

    /// `v` interpolated bilinearly; beyond `L` it continues with slope one.
    pub fn v_at(&self, x: f64, tau: f64) -> f64 {
        if self.trivial {
            return x.max(0.0);
        }
        if x > self.grid.length {
            self.bilinear(&self.v, self.grid.length, tau) + (x - self.grid.length)
        } else {
            self.bilinear(&self.v, x.max(0.0), tau)
        }
    }

    /// Risk ratio `-v_xx / v_x` interpolated bilinearly.
    pub fn y_at(&self, x: f64, tau: f64) -> f64 {
        self.bilinear(&self.y, x, tau)
    }

    /// Time-level row `n` of `u`.
    pub fn u_row(&self, n: usize) -> ndarray::ArrayView1<'_, f64> {
        self.u.row(n)
    }

    pub fn max_picard_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.iterations).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_defaults_and_validation() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        let g = Grid::new(&GridSpec::new(128, 64, 0.01), &d, &p).unwrap();
        let x2 = ComparisonBounds::new(&d, &p).x2;
        assert!((g.length - 1.25 * x2).abs() < 1e-12);
        assert_eq!(g.x(128), g.length);
        assert_eq!(g.tau(64), 1.0);

        let err = Grid::new(&GridSpec::new(128, 64, 0.01).with_length(x2 * 0.5), &d, &p).unwrap_err();
        assert!(err.to_string().contains("grid.L"));
        assert!(Grid::new(&GridSpec::new(32, 64, 0.01), &d, &p).is_err());
        assert!(Grid::new(&GridSpec::new(64, 64, 1.5), &d, &p).is_err());
    }

    #[test]
    fn locate_clamps() {
        assert_eq!(locate(-1.0, 0.1, 10), (0, 0.0));
        assert_eq!(locate(5.0, 0.1, 10), (9, 1.0));
        let (k, w) = locate(0.25, 0.1, 10);
        assert_eq!(k, 2);
        assert!((w - 0.5).abs() < 1e-12);
    }
}
