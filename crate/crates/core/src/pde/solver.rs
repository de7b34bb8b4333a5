use ndarray::Array2;

use super::invariants::{check_invariants, DEFAULT_TOL_INV};
use super::penalty::{boundary_smoother, penalty_beta, penalty_beta_prime};
use super::tridiag::solve_tridiagonal;
use super::{Grid, GridSpec, SolutionField, StepDiagnostics};
use crate::claims::{lambda_root, ClaimDistribution, ModelParams};
use crate::error::{Error, Result};

/// Ratios are clamped here before `A`/`B` see them; both are flat well
/// inside this range for every supported law.
const RATIO_CLAMP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when `max |u^{k+1} - u^k| <= picard_tol`.
    pub picard_tol: f64,
    pub max_picard: usize,
    /// Iteration count after which updates are damped.
    pub damping_after: usize,
    pub damping: f64,
    /// Run the invariant suites after the march and fail on a breach.
    pub check_invariants: bool,
    pub tol_inv: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            max_picard: 200,
            damping_after: 50,
            damping: 0.5,
            check_invariants: true,
            tol_inv: DEFAULT_TOL_INV,
        }
    }
}

/// Implicit time march for the penalized gradient equation
///
/// ```text
/// u_t - A(y) u_xx - (B(y) - gamma) u_x + c u + beta_eps(u - 1) = 0,  y = -u_x/u
/// lambda u + u_x = f_eps(tau)  at x = 0,     u = 1  at x = L,     u = 1  at tau = 0
/// ```
///
/// Each step freezes `A`, `B` at the current iterate, linearizes the penalty
/// (Newton), and solves the tridiagonal system; the matrix stays an M-matrix
/// because `beta' >= 0`.
#[derive(Debug, Clone)]
pub struct PenaltySolver {
    dist: ClaimDistribution,
    params: ModelParams,
    grid: Grid,
    lambda: f64,
    opts: SolverOptions,
}

impl PenaltySolver {
    pub fn new(dist: &ClaimDistribution, params: &ModelParams, grid: &GridSpec) -> Result<Self> {
        let grid = Grid::new(grid, dist, params)?;
        let lambda = lambda_root(dist, params)?;
        Ok(Self {
            dist: dist.clone(),
            params: *params,
            grid,
            lambda,
            opts: SolverOptions::default(),
        })
    }

    pub fn with_options(mut self, opts: SolverOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// March to `T`, integrate `v`, then (unless disabled) run the invariant
    /// suites and fail with [`Error::InvariantBreach`] on the first breach.
    pub fn solve(&self) -> Result<SolutionField> {
        let field = self.march()?;
        if self.opts.check_invariants {
            let report = check_invariants(&field, self.opts.tol_inv);
            if let Some(bad) = report.first_failure() {
                return Err(Error::InvariantBreach {
                    suite: bad.name.clone(),
                    defect: bad.worst_defect,
                    tolerance: bad.tolerance,
                });
            }
        }
        Ok(field)
    }

    fn march(&self) -> Result<SolutionField> {
        let g = self.grid;
        let (nx, nt) = (g.nx, g.nt);
        let m = nx + 1;
        let mut u = Array2::<f64>::ones((nt + 1, m));
        let mut y = Array2::<f64>::zeros((nt + 1, m));
        let mut diagnostics = Vec::with_capacity(nt);

        let mut ws = Workspace::new(m);
        let mut prev = vec![1.0; m];
        let mut iterate = vec![1.0; m];
        fill_ratio(&prev, g.dx, self.lambda, boundary_smoother(g.epsilon, self.lambda, 0.0), &mut ws.ratio);
        y.row_mut(0).assign(&ndarray::ArrayView1::from(&ws.ratio));

        for n in 1..=nt {
            let f_eps = boundary_smoother(g.epsilon, self.lambda, g.tau(n));
            iterate.copy_from_slice(&prev);
            let mut residual = f64::INFINITY;
            let mut iterations = 0;
            while residual > self.opts.picard_tol {
                if iterations == self.opts.max_picard {
                    return Err(Error::NonConvergence {
                        step: n,
                        iterations,
                        residual,
                    });
                }
                self.picard_sweep(&prev, &iterate, f_eps, &mut ws)?;
                let damp = if iterations >= self.opts.damping_after {
                    self.opts.damping
                } else {
                    1.0
                };
                residual = 0.0;
                for (old, new) in iterate.iter_mut().zip(&ws.rhs) {
                    let next = *old + damp * (new - *old);
                    residual = f64::max(residual, (next - *old).abs());
                    *old = next;
                }
                iterations += 1;
            }
            diagnostics.push(StepDiagnostics { iterations, residual });
            fill_ratio(&iterate, g.dx, self.lambda, f_eps, &mut ws.ratio);
            u.row_mut(n).assign(&ndarray::ArrayView1::from(&iterate));
            y.row_mut(n).assign(&ndarray::ArrayView1::from(&ws.ratio));
            prev.copy_from_slice(&iterate);
        }

        let mut field = SolutionField {
            grid: g,
            dist: self.dist.clone(),
            params: self.params,
            lambda: self.lambda,
            v: Array2::zeros(u.raw_dim()),
            u,
            y,
            diagnostics,
            trivial: false,
        };
        integrate_value(&mut field);
        Ok(field)
    }

    /// Assemble and solve one linearized system; the new iterate lands in `ws.rhs`.
    fn picard_sweep(&self, prev: &[f64], iterate: &[f64], f_eps: f64, ws: &mut Workspace) -> Result<()> {
        let g = &self.grid;
        let (dx, dtau) = (g.dx, g.dtau);
        let (gamma, c, eps, lambda) = (self.params.gamma, self.params.c, g.epsilon, self.lambda);
        let nx = g.nx;
        let inv_dt = 1.0 / dtau;
        let inv_dx2 = 1.0 / (dx * dx);

        fill_ratio(iterate, dx, lambda, f_eps, &mut ws.ratio);

        for i in 0..nx {
            let (a, bb) = self.dist.retained(ws.ratio[i]);
            let b = bb - gamma;
            let s = iterate[i] - 1.0;
            let beta = penalty_beta(eps, c, s);
            let dbeta = penalty_beta_prime(eps, c, s);
            let base = inv_dt + c + dbeta;
            let rhs = prev[i] * inv_dt - beta + dbeta * iterate[i];
            if i == 0 {
                // Ghost node from (u_1 - u_{-1}) / (2 dx) + lambda u_0 = f_eps.
                ws.lower[0] = 0.0;
                ws.diag[0] = base + 2.0 * a * inv_dx2 - 2.0 * a * lambda / dx + b * lambda;
                ws.upper[0] = -2.0 * a * inv_dx2;
                ws.rhs[0] = rhs - 2.0 * a * f_eps / dx + b * f_eps;
                continue;
            }
            let mut lo = -a * inv_dx2;
            let mut up = -a * inv_dx2;
            let mut di = base + 2.0 * a * inv_dx2;
            if b.abs() * dx <= 2.0 * a {
                lo += b / (2.0 * dx);
                up -= b / (2.0 * dx);
            } else if b > 0.0 {
                up -= b / dx;
                di += b / dx;
            } else {
                lo += b / dx;
                di -= b / dx;
            }
            ws.lower[i] = lo;
            ws.diag[i] = di;
            ws.upper[i] = up;
            ws.rhs[i] = rhs;
        }
        ws.lower[nx] = 0.0;
        ws.diag[nx] = 1.0;
        ws.upper[nx] = 0.0;
        ws.rhs[nx] = 1.0;

        if solve_tridiagonal(&ws.lower, &ws.diag, &ws.upper, &mut ws.rhs, &mut ws.scratch) {
            Ok(())
        } else {
            Err(Error::NonConvergence {
                step: 0,
                iterations: 0,
                residual: f64::NAN,
            })
        }
    }
}

struct Workspace {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    ratio: Vec<f64>,
}

impl Workspace {
    fn new(m: usize) -> Self {
        Self {
            lower: vec![0.0; m],
            diag: vec![0.0; m],
            upper: vec![0.0; m],
            rhs: vec![0.0; m],
            scratch: vec![0.0; m],
            ratio: vec![0.0; m],
        }
    }
}

/// Discrete `y = -u_x / max(u, 1)`: Robin relation at `x = 0`, centered
/// differences inside, one-sided at `x = L`.
pub(crate) fn fill_ratio(u: &[f64], dx: f64, lambda: f64, f_eps: f64, out: &mut [f64]) {
    let nx = u.len() - 1;
    out[0] = (lambda * u[0] - f_eps) / u[0].max(1.0);
    for i in 1..nx {
        out[i] = -(u[i + 1] - u[i - 1]) / (2.0 * dx) / u[i].max(1.0);
    }
    out[nx] = -(u[nx] - u[nx - 1]) / dx / u[nx].max(1.0);
    for r in out.iter_mut() {
        *r = r.clamp(-RATIO_CLAMP, RATIO_CLAMP);
    }
}

/// Solve the penalized problem with default options (invariants checked).
pub fn solve_penalized(dist: &ClaimDistribution, params: &ModelParams, grid: &GridSpec) -> Result<SolutionField> {
    PenaltySolver::new(dist, params, grid)?.solve()
}

/// Closed-form solution `u = 1`, `v = x` for the regime `gamma >= mu1`.
pub fn trivial_solution(dist: &ClaimDistribution, params: &ModelParams, grid: &GridSpec) -> Result<SolutionField> {
    if !params.is_trivial(dist) {
        return Err(Error::invalid(
            "model.gamma",
            format!("trivial solution requires gamma >= mu1 = {}, got {}", dist.mu1(), params.gamma),
        ));
    }
    let g = Grid::new(grid, dist, params)?;
    let shape = (g.nt + 1, g.nx + 1);
    let mut field = SolutionField {
        grid: g,
        dist: dist.clone(),
        params: *params,
        lambda: 0.0,
        u: Array2::ones(shape),
        v: Array2::zeros(shape),
        y: Array2::zeros(shape),
        diagnostics: vec![StepDiagnostics { iterations: 0, residual: 0.0 }; g.nt],
        trivial: true,
    };
    integrate_value(&mut field);
    Ok(field)
}

/// Recover `v(x_i, tau_n) = ∫_0^{x_i} u` by the composite trapezoid rule.
///
/// Accumulated as `x_i + ∫ (u - 1)` so that `u = 1` rows give `v = x` exactly.
pub fn integrate_value(field: &mut SolutionField) {
    let g = field.grid;
    for n in 0..=g.nt {
        let u = field.u.row(n);
        let mut excess = 0.0;
        field.v[[n, 0]] = 0.0;
        for i in 1..=g.nx {
            excess += 0.5 * g.dx * ((u[i - 1] - 1.0) + (u[i] - 1.0));
            field.v[[n, i]] = g.x(i) + excess;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse(dist: &ClaimDistribution, params: &ModelParams) -> SolutionField {
        PenaltySolver::new(dist, params, &GridSpec::new(256, 128, 0.02))
            .unwrap()
            .solve()
            .unwrap()
    }

    #[test]
    fn initial_and_far_boundary_conditions() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        let f = coarse(&d, &p);
        assert!(f.u.row(0).iter().all(|&u| u == 1.0));
        assert!(f.u.column(f.grid.nx).iter().all(|&u| u == 1.0));
        assert!(f.v.column(0).iter().all(|&v| v == 0.0));
        for i in 0..=f.grid.nx {
            assert_eq!(f.v[[0, i]], f.grid.x(i));
        }
        assert!(f.diagnostics.iter().all(|d| d.residual <= 1e-10));
    }

    #[test]
    fn robin_ratio_at_origin() {
        let d = ClaimDistribution::exponential(1.0).unwrap();
        let p = ModelParams::new(0.3, 0.1, 1.0).unwrap();
        let f = coarse(&d, &p);
        let n = f.grid.nt;
        assert!((f.y[[n, 0]] - f.lambda).abs() < 1e-12 * f.lambda);
    }

    #[test]
    fn near_trivial_gamma_stays_flat() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(1.0 - 1e-9, 0.1, 1.0).unwrap();
        let f = coarse(&d, &p);
        let dev = f.u.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
        assert!(dev <= 1e-3, "{dev}");
    }

    #[test]
    fn trivial_solution_is_identity() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(2.0, 0.1, 1.0).unwrap();
        let f = trivial_solution(&d, &p, &GridSpec::new(64, 64, 0.01)).unwrap();
        assert!(f.is_trivial());
        for n in [0, 17, 64] {
            for i in 0..=64 {
                assert_eq!(f.v[[n, i]], f.grid.x(i));
            }
        }
        assert_eq!(f.v_at(5.0, 1.0), 5.0);
        assert_eq!(f.v_at(0.0, 0.3), 0.0);
        let not_trivial = ModelParams::new(0.5, 0.1, 1.0).unwrap();
        assert!(trivial_solution(&d, &not_trivial, &GridSpec::new(64, 64, 0.01)).is_err());
    }

    #[test]
    fn no_root_regime_rejected_by_solver() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(1.0, 0.1, 1.0).unwrap();
        assert!(matches!(
            solve_penalized(&d, &p, &GridSpec::new(64, 64, 0.01)),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn picard_cap_reports_nonconvergence() {
        let d = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        let opts = SolverOptions {
            max_picard: 1,
            ..SolverOptions::default()
        };
        let err = PenaltySolver::new(&d, &p, &GridSpec::new(64, 64, 0.02))
            .unwrap()
            .with_options(opts)
            .solve()
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { step: 1, .. }), "{err}");
    }
}
