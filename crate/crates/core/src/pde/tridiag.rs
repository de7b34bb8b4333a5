//! Thomas algorithm for tridiagonal systems.

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place,
/// leaving the solution in `rhs`. `lower[0]` and `upper[n-1]` are ignored.
/// `scratch` must have the same length as `rhs`.
///
/// Returns `false` on a zero pivot. Stable without pivoting for the
/// diagonally dominant M-matrices the solver assembles.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> bool {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return true;
    }
    let mut denom = diag[0];
    if denom == 0.0 {
        return false;
    }
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        if denom == 0.0 {
            return false;
        }
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    true
}
