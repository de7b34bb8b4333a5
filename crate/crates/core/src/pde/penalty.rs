//! Penalty term and the smoothed Robin data used to regularize the corner.

/// `beta_eps(s) = -c ((eps - s)/eps)^3` for `s < eps`, zero otherwise.
///
/// C² across `s = eps`, non-positive, non-decreasing, with `beta_eps(0) = -c`.
#[inline]
pub fn penalty_beta(epsilon: f64, c: f64, s: f64) -> f64 {
    if s >= epsilon {
        0.0
    } else {
        let r = (epsilon - s) / epsilon;
        -c * r * r * r
    }
}

/// Derivative of [`penalty_beta`] in `s`; non-negative.
#[inline]
pub fn penalty_beta_prime(epsilon: f64, c: f64, s: f64) -> f64 {
    if s >= epsilon {
        0.0
    } else {
        let r = (epsilon - s) / epsilon;
        3.0 * c * r * r / epsilon
    }
}

/// Robin data `f_eps(t)`: a C¹ smoothstep from `lambda` at `t = 0` down to
/// zero at `t = eps`.
#[inline]
pub fn boundary_smoother(epsilon: f64, lambda: f64, t: f64) -> f64 {
    if t >= epsilon {
        0.0
    } else {
        let s = (t / epsilon).max(0.0);
        lambda * (1.0 - 3.0 * s * s + 2.0 * s * s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        let (eps, c) = (0.04, 0.1);
        assert_eq!(penalty_beta(eps, c, 0.0), -c);
        assert_eq!(penalty_beta(eps, c, eps), 0.0);
        assert!((penalty_beta(eps, c, eps / 2.0) + c / 8.0).abs() < 1e-16);
        assert_eq!(penalty_beta(eps, c, 1.0), 0.0);
    }

    #[test]
    fn beta_shape() {
        let (eps, c) = (0.01, 0.3);
        let mut prev = f64::NEG_INFINITY;
        for k in -200..=200 {
            let s = k as f64 * 1e-4;
            let b = penalty_beta(eps, c, s);
            assert!(b <= 0.0);
            assert!(b >= prev);
            assert!(penalty_beta_prime(eps, c, s) >= 0.0);
            prev = b;
        }
        // derivative matches a centered difference
        for s in [-0.02, -0.005, 0.0, 0.003, 0.0099] {
            let h = 1e-7;
            let fd = (penalty_beta(eps, c, s + h) - penalty_beta(eps, c, s - h)) / (2.0 * h);
            assert!((fd - penalty_beta_prime(eps, c, s)).abs() < 1e-5);
        }
    }

    #[test]
    fn smoother_examples() {
        let (eps, lam) = (0.02, 2.0);
        assert_eq!(boundary_smoother(eps, lam, 0.0), lam);
        assert_eq!(boundary_smoother(eps, lam, eps), 0.0);
        assert!((boundary_smoother(eps, lam, eps / 2.0) - lam / 2.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for k in 0..=100 {
            let v = boundary_smoother(eps, lam, k as f64 * eps / 80.0);
            assert!(v <= prev);
            prev = v;
        }
    }
}
