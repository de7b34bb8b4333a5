//! Free boundaries of a solved field.
//!
//! * `d(tau)`: dividend barrier, where `v_x` first reaches one.
//! * `K(z, tau)`: reinsurance barrier for claim size `z`, where the risk
//!   ratio `-v_xx/v_x` falls to `1/z`. Below it part of a claim `z` is ceded.
//!
//! For each `z` the three regions `x < K`, `K <= x < d`, `x >= d` partition
//! the surplus axis.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pde::{InvariantReport, SolutionField, SuiteResult, DEFAULT_TOL_INV};

/// Crossing level for `u = 1 + tol_fb`; the penalized `u` never hits one exactly.
pub const DEFAULT_TOL_FB: f64 = 1e-4;

/// Dividend barrier per time level, raw and after isotonic projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DividendBoundary {
    pub tau: Vec<f64>,
    pub raw: Vec<f64>,
    /// Closest non-decreasing sequence to `raw` in least squares.
    pub projected: Vec<f64>,
    /// Largest drop of `raw` below its running maximum.
    pub max_violation: f64,
}

impl DividendBoundary {
    /// Linear interpolation of the projected barrier in `tau`.
    pub fn at(&self, tau: f64) -> f64 {
        interp(&self.tau, &self.projected, tau)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&t| t <= x).min(last) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] * (1.0 - w) + ys[k + 1] * w
}

/// Pool-adjacent-violators projection onto non-decreasing sequences.
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        let mut block = (v, 1usize);
        while let Some(&(mean, len)) = blocks.last() {
            if mean <= block.0 {
                break;
            }
            blocks.pop();
            let total = len + block.1;
            block = ((mean * len as f64 + block.0 * block.1 as f64) / total as f64, total);
        }
        blocks.push(block);
    }
    blocks
        .into_iter()
        .flat_map(|(mean, len)| std::iter::repeat_n(mean, len))
        .collect()
}

/// Dividend barrier at time level `n`: the last crossing of `1 + tol_fb`,
/// interpolated linearly between nodes; zero if `u` never exceeds it.
pub fn dividend_level(field: &SolutionField, n: usize, tol_fb: f64) -> f64 {
    let g = &field.grid;
    let u = field.u.row(n);
    let level = 1.0 + tol_fb;
    match (0..g.nx).rev().find(|&i| u[i] > level) {
        None => 0.0,
        Some(i) => {
            let w = (u[i] - level) / (u[i] - u[i + 1]);
            g.x(i) + w * g.dx
        }
    }
}

/// Reinsurance barrier at time level `n` for claim size `z`.
pub fn reinsurance_level(field: &SolutionField, n: usize, z: f64) -> f64 {
    if field.is_trivial() || z <= (1.0 + 10.0 * DEFAULT_TOL_INV) / field.lambda {
        return 0.0;
    }
    let g = &field.grid;
    let y = field.y.row(n);
    let level = 1.0 / z;
    match (0..g.nx).rev().find(|&i| y[i] > level) {
        None => 0.0,
        Some(i) => {
            let w = (y[i] - level) / (y[i] - y[i + 1]);
            g.x(i) + w * g.dx
        }
    }
}

fn lerp_levels(field: &SolutionField, tau: f64, level: impl Fn(usize) -> f64) -> f64 {
    let (n, w) = field.grid.locate_tau(tau);
    let lo = level(n);
    if w == 0.0 {
        lo
    } else {
        lo * (1.0 - w) + level(n + 1) * w
    }
}

/// Extract `d(tau_n)` for every time level.
///
/// A barrier that reaches the truncation `L` means the domain was too short
/// and is reported as an invariant breach.
pub fn extract_dividend_boundary(field: &SolutionField, tol_fb: f64) -> Result<DividendBoundary> {
    let g = &field.grid;
    let tau: Vec<f64> = (0..=g.nt).map(|n| g.tau(n)).collect();
    let raw: Vec<f64> = (0..=g.nt).map(|n| dividend_level(field, n, tol_fb)).collect();
    if let Some(&worst) = raw.iter().find(|&&d| d >= g.length - g.dx) {
        return Err(Error::InvariantBreach {
            suite: "dividend_boundary_inside_domain".into(),
            defect: worst,
            tolerance: g.length - g.dx,
        });
    }
    let mut running = f64::NEG_INFINITY;
    let mut max_violation = 0.0f64;
    for &d in &raw {
        running = running.max(d);
        max_violation = max_violation.max(running - d);
    }
    Ok(DividendBoundary {
        projected: isotonic_increasing(&raw),
        tau,
        raw,
        max_violation,
    })
}

/// `K(z, tau_n)` for every time level.
pub fn extract_reinsurance_boundary(field: &SolutionField, z: f64) -> Vec<f64> {
    (0..=field.grid.nt).map(|n| reinsurance_level(field, n, z)).collect()
}

/// Barriers `K_j` for each atom of a discrete claim law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteBoundaries {
    pub atoms: Vec<f64>,
    /// Index of the first atom above `1/lambda`; `None` if every atom is below.
    pub first_ceded: Option<usize>,
    pub k: Vec<Vec<f64>>,
}

pub fn discrete_claim_boundaries(field: &SolutionField) -> Result<DiscreteBoundaries> {
    let atoms: Vec<f64> = field
        .dist
        .atoms()
        .ok_or_else(|| Error::invalid("distribution.kind", "per-atom boundaries need a discrete claim law"))?
        .iter()
        .map(|a| a.z)
        .collect();
    let first_ceded = if field.is_trivial() {
        None
    } else {
        atoms.iter().position(|&z| z > 1.0 / field.lambda)
    };
    let k = atoms
        .iter()
        .enumerate()
        .map(|(j, &z)| match first_ceded {
            Some(i0) if j >= i0 => extract_reinsurance_boundary(field, z),
            _ => vec![0.0; field.grid.nt + 1],
        })
        .collect();
    Ok(DiscreteBoundaries { atoms, first_ceded, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    ReinsuranceCovered,
    NonAction,
    DividendPayout,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::ReinsuranceCovered => "reinsurance_covered",
            Region::NonAction => "non_action",
            Region::DividendPayout => "dividend_payout",
        }
    }
}

/// Region of `(x, tau)` for claim size `z`, with `d` and `K` interpolated
/// linearly in `tau` from the row extractions.
pub fn classify(field: &SolutionField, x: f64, tau: f64, z: f64) -> Region {
    let d = lerp_levels(field, tau, |n| dividend_level(field, n, DEFAULT_TOL_FB));
    if x >= d {
        return Region::DividendPayout;
    }
    let k = lerp_levels(field, tau, |n| reinsurance_level(field, n, z));
    if x < k {
        Region::ReinsuranceCovered
    } else {
        Region::NonAction
    }
}

/// Optimal ceded part of a claim `z`: `max{z - 1/y, 0}` with `y` the risk ratio
/// at `(x, tau)`. Only defined below the dividend barrier.
pub fn ceded_loss(field: &SolutionField, x: f64, tau: f64, z: f64) -> Result<f64> {
    let d = lerp_levels(field, tau, |n| dividend_level(field, n, DEFAULT_TOL_FB));
    if x >= d {
        return Err(Error::OutOfRegion { x, tau, boundary: d });
    }
    let y = field.y_at(x, tau);
    Ok(if y > 0.0 { (z - 1.0 / y).max(0.0) } else { 0.0 })
}

/// Dividend barrier plus reinsurance barriers for a set of claim levels.
#[derive(Debug, Clone, Serialize)]
pub struct FreeBoundaries {
    pub dividend: DividendBoundary,
    /// Keyed by claim size (as bit pattern for ordering), in ascending order.
    #[serde(skip)]
    reinsurance: BTreeMap<u64, Vec<f64>>,
    pub x2: f64,
    pub lambda: f64,
}

impl FreeBoundaries {
    pub fn extract(field: &SolutionField, levels: &[f64], tol_fb: f64) -> Result<Self> {
        let dividend = extract_dividend_boundary(field, tol_fb)?;
        let reinsurance = levels
            .iter()
            .filter(|z| z.is_finite() && **z > 0.0)
            .map(|&z| (z.to_bits(), extract_reinsurance_boundary(field, z)))
            .collect();
        Ok(Self {
            dividend,
            reinsurance,
            x2: field.bounds().x2,
            lambda: field.lambda,
        })
    }

    /// `(z, K(z, ·))` pairs in ascending `z`.
    pub fn reinsurance(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.reinsurance.iter().map(|(&bits, k)| (f64::from_bits(bits), k.as_slice()))
    }

    pub fn reinsurance_for(&self, z: f64) -> Option<&[f64]> {
        self.reinsurance.get(&z.to_bits()).map(Vec::as_slice)
    }

    /// Checks every proved property of the barriers against the stored vectors.
    pub fn check(&self, field: &SolutionField) -> InvariantReport {
        let g = &field.grid;
        let dx = g.dx;
        let c = field.params.c;
        let d = &self.dividend.raw;
        let mut report = InvariantReport::default();

        report.push(SuiteResult::new("dividend_monotone_in_tau", self.dividend.max_violation, dx));
        let over = d.iter().map(|&v| v - self.x2).fold(0.0f64, f64::max);
        report.push(SuiteResult::new("dividend_below_x2", over, dx));
        report.push(SuiteResult::new("dividend_starts_at_zero", d[1.min(g.nt)], 2.0 * dx));

        let mut below_threshold = 0.0f64;
        let mut strictly_inside = 0.0f64;
        let mut universal = 0.0f64;
        let mut prev: Option<&[f64]> = None;
        let mut monotone_z = 0.0f64;
        for (z, k) in self.reinsurance() {
            let inverse_lambda = if self.lambda > 0.0 { 1.0 / self.lambda } else { f64::INFINITY };
            for (n, &kn) in k.iter().enumerate() {
                if z <= inverse_lambda {
                    below_threshold = below_threshold.max(kn);
                } else {
                    universal = universal.max(kn - (z - inverse_lambda) / (2.0 * c) - dx);
                }
                if kn > 0.0 && kn >= d[n] {
                    strictly_inside = strictly_inside.max((kn - d[n]).max(f64::EPSILON));
                }
                if let Some(p) = prev {
                    monotone_z = monotone_z.max(p[n] - kn);
                }
            }
            prev = Some(k);
        }
        report.push(SuiteResult::new("reinsurance_zero_below_inverse_lambda", below_threshold, 0.0));
        report.push(SuiteResult::new("reinsurance_below_dividend", strictly_inside, 0.0));
        report.push(SuiteResult::new("reinsurance_universal_bound", universal, 0.0));
        report.push(SuiteResult::new("reinsurance_monotone_in_z", monotone_z, 0.0));
        report
    }
}

/// Ordering and spacing of per-atom barriers, with `2 dx` slack:
/// `K_j = 0` below `1/lambda`, `0 < K_{i0} < (z_{i0} - 1/lambda)/(2c)`,
/// `0 < K_j - K_{j-1} < (z_j - z_{j-1})/(2c)`, and `K_j(tau_1) -> 0`.
///
/// Strict positivity is only asserted once `tau >= 2 eps`, after the
/// start-up layer of the Robin data.
pub fn check_discrete_boundaries(field: &SolutionField, b: &DiscreteBoundaries) -> InvariantReport {
    let g = &field.grid;
    let slack = 2.0 * g.dx;
    let c = field.params.c;
    let settled = |n: usize| g.tau(n) >= 2.0 * g.epsilon;
    let mut zero_below = 0.0f64;
    let mut first_bound = 0.0f64;
    let mut spacing = 0.0f64;
    let mut start = 0.0f64;
    for (j, k) in b.k.iter().enumerate() {
        start = start.max(k[1.min(g.nt)]);
        match b.first_ceded {
            Some(i0) if j >= i0 => {
                for (n, &kn) in k.iter().enumerate() {
                    let (lower, gap_bound) = if j == i0 {
                        (kn, (b.atoms[j] - 1.0 / field.lambda) / (2.0 * c))
                    } else {
                        (kn - b.k[j - 1][n], (b.atoms[j] - b.atoms[j - 1]) / (2.0 * c))
                    };
                    let upper_defect = lower - gap_bound - slack;
                    let target = if j == i0 { &mut first_bound } else { &mut spacing };
                    *target = target.max(upper_defect);
                    if settled(n) && lower <= 0.0 {
                        *target = target.max(-lower + f64::EPSILON);
                    }
                }
            }
            _ => zero_below = zero_below.max(k.iter().copied().fold(0.0, f64::max)),
        }
    }
    let mut report = InvariantReport::default();
    report.push(SuiteResult::new("atoms_below_inverse_lambda_uncovered", zero_below, 0.0));
    report.push(SuiteResult::new("first_ceded_atom_bound", first_bound.max(0.0), 0.0));
    report.push(SuiteResult::new("atom_boundary_spacing", spacing.max(0.0), 0.0));
    report.push(SuiteResult::new("atom_boundaries_start_at_zero", start, slack));
    report
}

/// Discrete risk-ratio diagnostics on the no-dividend region for `tau >= tau_min`.
///
/// The one-sided estimate at `x = 0` only resolves the start-up layer of the
/// boundary data once its width `~ sqrt(tau)` spans many cells, so callers
/// comparing it against `lambda` should pick `tau_min` accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioDiagnostics {
    /// Largest increase of `y = -u_x/u` between neighbouring nodes below `d`.
    pub max_increase: f64,
    /// Smallest slope of the retention cap `1/y` below `d` (should be >= 2c).
    pub min_cap_slope: f64,
    /// Worst relative gap between `-u_x/u` at `x = 0` (one-sided, second
    /// order, independent of the stored ratio) and `lambda`.
    pub boundary_rel_error: f64,
}

pub fn ratio_diagnostics(field: &SolutionField, dividend: &DividendBoundary, tau_min: f64) -> RatioDiagnostics {
    let g = &field.grid;
    let mut out = RatioDiagnostics {
        max_increase: 0.0,
        min_cap_slope: f64::INFINITY,
        boundary_rel_error: 0.0,
    };
    for n in 0..=g.nt {
        if g.tau(n) < tau_min.max(2.0 * g.epsilon) {
            continue;
        }
        let u = field.u.row(n);
        let y = field.y.row(n);
        let ux0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * g.dx);
        out.boundary_rel_error = out.boundary_rel_error.max(((-ux0 / u[0]) - field.lambda).abs() / field.lambda);
        let d = dividend.raw[n];
        for i in 0..g.nx {
            if g.x(i + 1) >= d {
                break;
            }
            out.max_increase = out.max_increase.max(y[i + 1] - y[i]);
            if y[i] > 0.0 && y[i + 1] > 0.0 {
                out.min_cap_slope = out.min_cap_slope.min((1.0 / y[i + 1] - 1.0 / y[i]) / g.dx);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isotonic_examples() {
        assert_eq!(isotonic_increasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic_increasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert!(isotonic_increasing(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn isotonic_is_monotone_and_mean_preserving(v in prop::collection::vec(-5.0f64..5.0, 1..60)) {
            let p = isotonic_increasing(&v);
            prop_assert_eq!(p.len(), v.len());
            prop_assert!(p.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            let (a, b): (f64, f64) = (v.iter().sum(), p.iter().sum());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn interp_clamps() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 20.0];
        assert_eq!(interp(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp(&xs, &ys, 1.5), 15.0);
        assert_eq!(interp(&xs, &ys, 3.0), 20.0);
    }
}
