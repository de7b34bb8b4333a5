use ndarray::Array2;
use serde::Serialize;

use super::SolutionField;

/// Worst-case defects of the variational inequality on a solved field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSummary {
    /// `max |min{v_tau - Lv, v_x - 1}|` over interior nodes with `tau >= 2 eps`.
    pub complementarity: f64,
    /// `max |v_tau - Lv|` where `u > 1 + eps` (continuation region).
    pub continuation: f64,
    /// Most negative `v_tau - Lv` where `u <= 1 + eps` (payout region).
    pub payout_violation: f64,
}

/// Pointwise `min{(v_tau - L v), u - 1}` at interior nodes, with
///
/// ```text
/// L v = A(y) v_xx + B(y) v_x - gamma v_x - c v,   v_x = u,  v_xx = u_x,  y = -u_x/u
/// ```
///
/// `v_tau` is the backward difference matching the implicit march. Row 0 and
/// the two spatial end nodes are left at zero.
pub fn hjb_residual(field: &SolutionField) -> (Array2<f64>, ResidualSummary) {
    let g = field.grid;
    let (gamma, c) = (field.params.gamma, field.params.c);
    let mut out = Array2::zeros(field.u.raw_dim());
    let mut summary = ResidualSummary {
        complementarity: 0.0,
        continuation: 0.0,
        payout_violation: 0.0,
    };
    for n in 1..=g.nt {
        for i in 1..g.nx {
            let u = field.u[[n, i]];
            let ux = (field.u[[n, i + 1]] - field.u[[n, i - 1]]) / (2.0 * g.dx);
            let (a, b) = field.dist.retained(field.y[[n, i]]);
            let lv = a * ux + (b - gamma) * u - c * field.v[[n, i]];
            let vt = (field.v[[n, i]] - field.v[[n - 1, i]]) / g.dtau;
            let pde = vt - lv;
            let r = pde.min(u - 1.0);
            out[[n, i]] = r;
            // The start-up layer of f_eps dominates any other error.
            if g.tau(n) < 2.0 * g.epsilon {
                continue;
            }
            summary.complementarity = summary.complementarity.max(r.abs());
            if u > 1.0 + g.epsilon {
                summary.continuation = summary.continuation.max(pde.abs());
            } else {
                summary.payout_violation = summary.payout_violation.max(-pde);
            }
        }
    }
    (out, summary)
}
