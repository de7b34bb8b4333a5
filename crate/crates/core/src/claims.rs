//! Claim-size law and the scalar calculus derived from it.
//!
//! For a retention cap `u = 1/y` the insurer keeps `min(Z, u)` of each
//! claim, so the two retained moments are
//!
//! ```text
//! A(y) = E[min(Z, 1/y)^2] / 2 = ∫_0^{1/y} z (1 - F(z)) dz
//! B(y) = E[min(Z, 1/y)]       = ∫_0^{1/y} (1 - F(z)) dz
//! ```
//!
//! with `A(y) = mu2/2`, `B(y) = mu1` for `y <= 0` (no cap). Every law here
//! has these in closed form, which matters because the PDE solver evaluates
//! them at every node of every Picard sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One atom `(z, p)` of a discrete claim law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    PointMass,
    Discrete,
    Exponential,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    /// Atoms sorted ascending; also used for point masses.
    Atoms(Vec<Atom>),
    Exponential { mean: f64 },
    Uniform { upper: f64 },
}

/// Claim distribution `F` with cached first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimDistribution {
    kind: ClaimKind,
    law: Law,
    mu1: f64,
    mu2: f64,
}

const PROB_SUM_TOL: f64 = 1e-9;

impl ClaimDistribution {
    pub fn point_mass(z: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::invalid("distribution.z", format!("claim size must be finite and > 0, got {z}")));
        }
        Ok(Self {
            kind: ClaimKind::PointMass,
            law: Law::Atoms(vec![Atom { z, p: 1.0 }]),
            mu1: z,
            mu2: z * z,
        })
    }

    /// Discrete law from `(z, p)` pairs. Atoms are sorted; duplicate sizes are
    /// rejected and the probabilities must sum to one within `1e-9`.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("distribution.atoms", "at least one atom is required"));
        }
        let mut sorted = Vec::with_capacity(atoms.len());
        for (j, &(z, p)) in atoms.iter().enumerate() {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::invalid(
                    format!("distribution.atoms[{j}][0]"),
                    format!("claim size must be finite and > 0, got {z}"),
                ));
            }
            if !(p.is_finite() && p > 0.0 && p <= 1.0) {
                return Err(Error::invalid(
                    format!("distribution.atoms[{j}][1]"),
                    format!("probability must lie in (0, 1], got {p}"),
                ));
            }
            sorted.push(Atom { z, p });
        }
        let total: f64 = sorted.iter().map(|a| a.p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(
                "distribution.atoms",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        sorted.sort_by(|a, b| a.z.total_cmp(&b.z));
        if let Some(w) = sorted.windows(2).find(|w| w[0].z == w[1].z) {
            return Err(Error::invalid(
                "distribution.atoms",
                format!("duplicate claim size {}", w[0].z),
            ));
        }
        let mu1 = sorted.iter().map(|a| a.p * a.z).sum();
        let mu2 = sorted.iter().map(|a| a.p * a.z * a.z).sum();
        Ok(Self {
            kind: ClaimKind::Discrete,
            law: Law::Atoms(sorted),
            mu1,
            mu2,
        })
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::invalid("distribution.scale", format!("mean must be finite and > 0, got {mean}")));
        }
        Ok(Self {
            kind: ClaimKind::Exponential,
            law: Law::Exponential { mean },
            mu1: mean,
            mu2: 2.0 * mean * mean,
        })
    }

    /// Uniform on `[0, upper]`.
    pub fn uniform(upper: f64) -> Result<Self> {
        if !(upper.is_finite() && upper > 0.0) {
            return Err(Error::invalid("distribution.scale", format!("upper endpoint must be finite and > 0, got {upper}")));
        }
        Ok(Self {
            kind: ClaimKind::Uniform,
            law: Law::Uniform { upper },
            mu1: upper / 2.0,
            mu2: upper * upper / 3.0,
        })
    }

    pub fn kind(&self) -> ClaimKind {
        self.kind
    }

    /// Atoms of a point-mass or discrete law, sorted ascending.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.law {
            Law::Atoms(a) => Some(a),
            _ => None,
        }
    }

    /// Mean for exponential, upper endpoint for uniform.
    pub fn scale(&self) -> Option<f64> {
        match self.law {
            Law::Exponential { mean } => Some(mean),
            Law::Uniform { upper } => Some(upper),
            Law::Atoms(_) => None,
        }
    }

    /// `(mu1, mu2)`, the first two raw moments.
    pub fn moments(&self) -> (f64, f64) {
        (self.mu1, self.mu2)
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// Essential supremum of the claim size, `None` if unbounded.
    pub fn ess_sup(&self) -> Option<f64> {
        match &self.law {
            Law::Atoms(a) => a.last().map(|a| a.z),
            Law::Exponential { .. } => None,
            Law::Uniform { upper } => Some(*upper),
        }
    }

    /// `F(z) = P(Z <= z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        match &self.law {
            Law::Atoms(a) => a.iter().filter(|a| a.z <= z).map(|a| a.p).sum::<f64>().min(1.0),
            Law::Exponential { mean } => -(-z / mean).exp_m1(),
            Law::Uniform { upper } => (z / upper).min(1.0),
        }
    }

    /// `sup_z z^3 (1 - F(z))`, evaluated analytically. Finite for every
    /// supported law, which is the standing tail condition on claims.
    pub fn tail_cubic_sup(&self) -> f64 {
        match &self.law {
            Law::Atoms(a) => {
                // z^3 S(z) peaks just below each atom, where S(z-) = P(Z >= z_j).
                let mut tail = 1.0;
                let mut best: f64 = 0.0;
                for atom in a {
                    best = best.max(atom.z.powi(3) * tail);
                    tail -= atom.p;
                }
                best
            }
            Law::Exponential { mean } => 27.0 * mean.powi(3) * (-3.0f64).exp(),
            Law::Uniform { upper } => 27.0 * upper.powi(3) / 256.0,
        }
    }

    /// `A(y) = E[min(Z, 1/y)^2] / 2`, or `mu2 / 2` for `y <= 0`.
    pub fn retained_a(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.5 * self.mu2;
        }
        let cap = 1.0 / y;
        match &self.law {
            Law::Atoms(a) => {
                0.5 * a
                    .iter()
                    .map(|a| {
                        let h = a.z.min(cap);
                        a.p * h * h
                    })
                    .sum::<f64>()
            }
            Law::Exponential { mean } => mean * mean * exp_second_moment_fraction(cap / mean),
            Law::Uniform { upper } => {
                if cap >= *upper {
                    upper * upper / 6.0
                } else {
                    cap * cap * (0.5 - cap / (3.0 * upper))
                }
            }
        }
    }

    /// `B(y) = E[min(Z, 1/y)]`, or `mu1` for `y <= 0`.
    pub fn retained_b(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.mu1;
        }
        let cap = 1.0 / y;
        match &self.law {
            Law::Atoms(a) => a.iter().map(|a| a.p * a.z.min(cap)).sum(),
            Law::Exponential { mean } => -mean * (-cap / mean).exp_m1(),
            Law::Uniform { upper } => {
                if cap >= *upper {
                    upper / 2.0
                } else {
                    cap * (1.0 - cap / (2.0 * upper))
                }
            }
        }
    }

    /// `(A(y), B(y))` in one call.
    #[inline]
    pub fn retained(&self, y: f64) -> (f64, f64) {
        (self.retained_a(y), self.retained_b(y))
    }
}

/// `1 - e^{-t}(1 + t)`, accurate for small `t` where the direct form cancels.
fn exp_second_moment_fraction(t: f64) -> f64 {
    if t < 0.5 {
        // sum_{k>=2} (-1)^k (k-1) t^k / k!
        let mut term = t * t / 2.0; // t^k / k! at k = 2
        let mut sum = 0.0;
        let mut k = 2.0;
        let mut sign = 1.0;
        while term > 1e-18 * t * t {
            sum += sign * (k - 1.0) * term;
            k += 1.0;
            term *= t / k;
            sign = -sign;
        }
        sum
    } else {
        -(-t).exp_m1() - t * (-t).exp()
    }
}

/// Economic constants of the model; the reinsurer's loading is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Net cost of reinsurance `(rho - delta) * mu1`.
    pub gamma: f64,
    /// Discount rate.
    pub c: f64,
    /// Horizon `T`.
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, c: f64, horizon: f64) -> Result<Self> {
        let p = Self { gamma, c, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("model.gamma", self.gamma), ("model.c", self.c), ("model.T", self.horizon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// True when `gamma >= mu1`, where paying everything at once is optimal.
    pub fn is_trivial(&self, dist: &ClaimDistribution) -> bool {
        self.gamma >= dist.mu1()
    }
}

/// `f(y) = -y A(y) + B(y) - gamma`, strictly decreasing with slope `-A(y)`.
pub fn drift_f(dist: &ClaimDistribution, params: &ModelParams, y: f64) -> f64 {
    let (a, b) = dist.retained(y);
    -y * a + b - params.gamma
}

/// The unique positive root `lambda` of [`drift_f`], found by bisection.
///
/// Fails with [`Error::NoRoot`] when `gamma >= mu1`.
pub fn lambda_root(dist: &ClaimDistribution, params: &ModelParams) -> Result<f64> {
    if params.is_trivial(dist) {
        return Err(Error::NoRoot {
            gamma: params.gamma,
            mu1: dist.mu1(),
        });
    }
    let f = |y: f64| drift_f(dist, params, y);
    let (mut lo, mut hi) = (1e-8, 1.0);
    while f(lo) <= 0.0 {
        hi = lo;
        lo *= 1e-2;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NoRoot {
                gamma: params.gamma,
                mu1: dist.mu1(),
            });
        }
    }
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let tol = 1e-12 * params.gamma.max(1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    debug_assert!(f(root).abs() <= tol, "bisection residual {} above {tol}", f(root));
    Ok(root)
}

/// Optimal retained part of a claim `z` given the risk ratio `y`:
/// `min(z, 1/y)` for `y > 0`, full retention otherwise.
#[inline]
pub fn optimal_retention(z: f64, y: f64) -> f64 {
    if y > 0.0 {
        z.min(1.0 / y)
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn moments_closed_form() {
        assert_eq!(ClaimDistribution::point_mass(1.0).unwrap().moments(), (1.0, 1.0));
        assert_eq!(ClaimDistribution::exponential(2.0).unwrap().moments(), (2.0, 8.0));
        assert_eq!(ClaimDistribution::uniform(3.0).unwrap().moments(), (1.5, 3.0));
        let d = ClaimDistribution::discrete(&[(2.0, 0.7), (0.5, 0.3)]).unwrap();
        assert!(close(d.mu1(), 1.55, 1e-15));
        assert!(close(d.mu2(), 2.875, 1e-15));
        assert_eq!(d.atoms().unwrap()[0].z, 0.5);
    }

    #[test]
    fn rejects_bad_atoms() {
        let err = ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.6)]).unwrap_err();
        assert!(err.to_string().contains("distribution.atoms"), "{err}");
        assert!(ClaimDistribution::discrete(&[(1.0, 0.5), (1.0, 0.5)]).is_err());
        assert!(ClaimDistribution::discrete(&[(-1.0, 1.0)]).is_err());
        assert!(ClaimDistribution::exponential(0.0).is_err());
        assert!(ClaimDistribution::uniform(f64::NAN).is_err());
    }

    #[test]
    fn retained_a_cases() {
        let pm = ClaimDistribution::point_mass(1.0).unwrap();
        for d in [
            pm.clone(),
            ClaimDistribution::exponential(1.3).unwrap(),
            ClaimDistribution::uniform(2.0).unwrap(),
        ] {
            assert_eq!(d.retained_a(-1.0), d.mu2() / 2.0);
        }
        assert!(close(pm.retained_a(2.0), 0.125, 1e-15));
        assert!(close(pm.retained_a(0.5), 0.5, 1e-15));
    }

    #[test]
    fn retained_b_cases() {
        let pm = ClaimDistribution::point_mass(1.0).unwrap();
        assert_eq!(pm.retained_b(0.0), 1.0);
        assert!(close(pm.retained_b(2.0), 0.5, 1e-15));
        let m = 1.7;
        let e = ClaimDistribution::exponential(m).unwrap();
        assert!(close(e.retained_b(1.0 / m), m * (1.0 - (-1.0f64).exp()), 1e-14));
    }

    #[test]
    fn saturation_above_support() {
        let u = ClaimDistribution::uniform(2.0).unwrap();
        assert_eq!(u.retained(0.4), (u.mu2() / 2.0, u.mu1()));
        let d = ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.7)]).unwrap();
        assert!(close(d.retained_a(0.5), d.mu2() / 2.0, 1e-15));
        assert!(close(d.retained_b(0.5), d.mu1(), 1e-15));
    }

    #[test]
    fn exponential_small_cap_series() {
        let e = ClaimDistribution::exponential(1.0).unwrap();
        for t in [1e-8, 1e-4, 0.1, 0.49, 0.51, 2.0] {
            let direct = 1.0 - (-t as f64).exp() * (1.0 + t);
            let a = e.retained_a(1.0 / t);
            // A <= cap^2 / 2 always.
            assert!(a <= 0.5 * t * t * (1.0 + 1e-12));
            if t > 1e-3 {
                assert!(close(a, direct, 1e-9), "t = {t}: {a} vs {direct}");
            }
        }
    }

    #[test]
    fn drift_limits_and_zero() {
        let pm = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(0.25, 0.1, 1.0).unwrap();
        assert!(close(drift_f(&pm, &p, 1e-12), pm.mu1() - p.gamma, 1e-10));
        assert!(close(drift_f(&pm, &p, 1e12), -p.gamma, 1e-10));
        assert!(drift_f(&pm, &p, 2.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_point_mass_closed_forms() {
        let pm = ClaimDistribution::point_mass(1.0).unwrap();
        let l1 = lambda_root(&pm, &ModelParams::new(0.25, 0.1, 1.0).unwrap()).unwrap();
        assert!((l1 - 2.0).abs() < 1e-10);
        let l2 = lambda_root(&pm, &ModelParams::new(0.75, 0.1, 1.0).unwrap()).unwrap();
        assert!((l2 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn lambda_no_root_at_mu1() {
        let e = ClaimDistribution::exponential(2.0).unwrap();
        let p = ModelParams::new(2.0, 0.1, 1.0).unwrap();
        assert!(matches!(lambda_root(&e, &p), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn lambda_below_initial_bracket() {
        // gamma just under mu1 pushes the root to ~2e-9, below the 1e-8 start.
        let pm = ClaimDistribution::point_mass(1.0).unwrap();
        let p = ModelParams::new(1.0 - 1e-9, 0.1, 1.0).unwrap();
        let l = lambda_root(&pm, &p).unwrap();
        assert!(close(l, 2e-9, 1e-6), "{l}");
    }

    #[test]
    fn lambda_discrete_reference() {
        // 1/lambda = 0.4 lies below both atoms, so f(y) = 1/(2y) - gamma there.
        let d = ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.7)]).unwrap();
        let l = lambda_root(&d, &ModelParams::new(0.2, 0.1, 1.0).unwrap()).unwrap();
        assert!((l - 2.5).abs() < 1e-10);
    }

    #[test]
    fn retention_examples() {
        assert_eq!(optimal_retention(3.0, 0.5), 2.0);
        assert_eq!(optimal_retention(3.0, -1.0), 3.0);
        assert_eq!(optimal_retention(0.1, 2.0), 0.1);
    }

    #[test]
    fn tail_sup_is_finite() {
        let ds = [
            ClaimDistribution::point_mass(2.0).unwrap(),
            ClaimDistribution::discrete(&[(0.5, 0.3), (2.0, 0.7)]).unwrap(),
            ClaimDistribution::exponential(1.0).unwrap(),
            ClaimDistribution::uniform(4.0).unwrap(),
        ];
        assert_eq!(ds[0].tail_cubic_sup(), 8.0);
        assert!(close(ds[1].tail_cubic_sup(), 0.7 * 8.0, 1e-12));
        for d in &ds {
            assert!(d.tail_cubic_sup().is_finite());
            // Spot-check the analytic sup against a scan.
            let scan = (1..20000)
                .map(|k| {
                    let z = k as f64 * 1e-3;
                    z.powi(3) * (1.0 - d.cdf(z))
                })
                .fold(0.0f64, f64::max);
            assert!(scan <= d.tail_cubic_sup() * (1.0 + 1e-9));
        }
    }
}
