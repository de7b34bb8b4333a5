//! Explicit super-solutions and a-priori bounds used to check a solve.

use crate::claims::{ClaimDistribution, ModelParams};

/// Constants of the explicit comparison functions.
///
/// `v_hat` dominates the value function, `u_hat` dominates its gradient and
/// vanishes (equals one) beyond `x2`, which therefore bounds the dividend
/// boundary for every horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonBounds {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub x1: f64,
    pub x2: f64,
    gamma: f64,
}

impl ComparisonBounds {
    pub fn new(dist: &ClaimDistribution, params: &ModelParams) -> Self {
        let (mu1, mu2) = dist.moments();
        let (gamma, c) = (params.gamma, params.c);
        let c1 = mu1 / c + gamma;
        let c2 = mu1 / c;
        let c3 = c * c / (c * mu2 + gamma * gamma);
        let x1 = gamma * (c1 / gamma).ln();
        let x2 = ((mu1 + c * gamma) * (c * mu2 + gamma * gamma) / (gamma * c.powi(3))).sqrt();
        Self {
            c1,
            c2,
            c3,
            x1,
            x2,
            gamma,
        }
    }

    /// Concave super-solution of the value problem.
    pub fn v_hat(&self, x: f64) -> f64 {
        if x <= self.x1 {
            self.c1 * -(-x / self.gamma).exp_m1()
        } else {
            self.c2 + x - self.x1
        }
    }

    /// Convex super-solution of the gradient problem.
    pub fn u_hat(&self, x: f64) -> f64 {
        if x <= self.x2 {
            let r = self.x2 - x;
            self.c3 * r * r + 1.0
        } else {
            1.0
        }
    }
}

/// Growth bound `u <= K e^{Lambda tau} / (x + 1/lambda)` on the truncated
/// domain `[0, L]`, with `K = L + 1/lambda + 1` and
/// `Lambda = mu2/gamma^2 + gamma lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub k: f64,
    pub rate: f64,
    lambda: f64,
}

impl GrowthBound {
    pub fn new(dist: &ClaimDistribution, params: &ModelParams, lambda: f64, length: f64) -> Self {
        let gamma = params.gamma;
        Self {
            k: length + 1.0 / lambda + 1.0,
            rate: dist.mu2() / (gamma * gamma) + gamma * lambda,
            lambda,
        }
    }

    pub fn at(&self, x: f64, tau: f64) -> f64 {
        self.k * (self.rate * tau).exp() / (x + 1.0 / self.lambda)
    }
}
