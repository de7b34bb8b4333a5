//! Controlled Markov-chain approximation of the value function.
//!
//! Independent of the penalty solver: it works on `v` directly, with the
//! retention control taken from a finite menu and the dividend action as a
//! downward jump that pays its size. Used as a coarse cross-check.

use ndarray::Array2;

use super::bounds::ComparisonBounds;
use crate::claims::{lambda_root, ClaimDistribution, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McaOptions {
    /// Number of lattice cells on `[0, top]`.
    pub levels: usize,
    /// Size of the retention menu, log-spaced over `[y*/8, 8 y*]`.
    pub controls: usize,
    /// Lattice top; `None` runs a pilot pass on `[0, x2]` and refits the
    /// lattice to twice the pilot's payout barrier.
    pub top: Option<f64>,
}

impl Default for McaOptions {
    fn default() -> Self {
        Self {
            levels: 128,
            controls: 16,
            top: None,
        }
    }
}

/// Lattice values `values[[n, i]] ≈ v(x_i, tau_n)`.
#[derive(Debug, Clone)]
pub struct McaTable {
    pub x: Vec<f64>,
    pub tau: Vec<f64>,
    pub values: Array2<f64>,
    /// Lowest lattice point from which paying out is optimal, per time level.
    pub barrier: Vec<f64>,
    pub dt: f64,
}

impl McaTable {
    pub fn top(&self) -> f64 {
        *self.x.last().expect("non-empty lattice")
    }

    /// Bilinear interpolation; linear continuation with slope one above the lattice.
    pub fn value_at(&self, x: f64, tau: f64) -> f64 {
        let top = self.top();
        if x > top {
            return self.value_at(top, tau) + (x - top);
        }
        let h = self.x[1] - self.x[0];
        let cells = self.x.len() - 1;
        let steps = self.tau.len() - 1;
        let pos = (x.max(0.0) / h).min(cells as f64);
        let i = (pos.floor() as usize).min(cells - 1);
        let wx = pos - i as f64;
        let tpos = (tau.max(0.0) / self.dt).min(steps as f64);
        let n = (tpos.floor() as usize).min(steps - 1);
        let wt = tpos - n as f64;
        let row = |k: usize| self.values[[k, i]] * (1.0 - wx) + self.values[[k, i + 1]] * wx;
        row(n) * (1.0 - wt) + row(n + 1) * wt
    }
}

/// Value function by backward induction on a locally consistent chain.
///
/// For retention ratio `y` the surplus has drift `B(y) - gamma` and variance
/// `2 A(y)`; from lattice point `x_i` it moves one cell up or down with
///
/// ```text
/// p± = dt (σ²/2 + h μ±) / h²,   dt <= 0.9 h² / (σ² + h|μ|)  for every control,
/// ```
///
/// and is killed at zero. After the continuation step, `V_i = max(V_i, V_{i-1} + h)`
/// is swept upward so the dividend jump is taken within the same instant.
pub fn mca_oracle(dist: &ClaimDistribution, params: &ModelParams, opts: &McaOptions) -> McaTable {
    let x2 = ComparisonBounds::new(dist, params).x2;
    let top = match opts.top {
        Some(t) => t,
        None => {
            let pilot = induct(dist, params, x2, opts.levels, opts.controls);
            let h = x2 / opts.levels as f64;
            let reach = pilot.barrier.iter().copied().fold(0.0, f64::max);
            if reach > 0.0 {
                (2.0 * reach + 4.0 * h).min(x2)
            } else {
                x2
            }
        }
    };
    induct(dist, params, top, opts.levels, opts.controls)
}

struct Control {
    up: f64,
    down: f64,
}

fn induct(dist: &ClaimDistribution, params: &ModelParams, top: f64, levels: usize, controls: usize) -> McaTable {
    assert!(levels >= 2 && controls >= 1);
    let h = top / levels as f64;
    let y_ref = lambda_root(dist, params).unwrap_or(dist.mu1() / dist.mu2());
    let menu: Vec<(f64, f64)> = (0..controls)
        .map(|k| {
            let t = if controls == 1 {
                0.0
            } else {
                2.0 * k as f64 / (controls - 1) as f64 - 1.0
            };
            let y = y_ref * 8f64.powf(t);
            let (a, b) = dist.retained(y);
            (b - params.gamma, 2.0 * a)
        })
        .collect();

    let dt_cap = menu
        .iter()
        .map(|&(mu, var)| h * h / (var + h * mu.abs()))
        .fold(f64::INFINITY, f64::min);
    let steps = (params.horizon / (0.9 * dt_cap)).ceil().max(1.0) as usize;
    let dt = params.horizon / steps as f64;
    let probs: Vec<Control> = menu
        .iter()
        .map(|&(mu, var)| Control {
            up: dt * (0.5 * var + h * mu.max(0.0)) / (h * h),
            down: dt * (0.5 * var + h * (-mu).max(0.0)) / (h * h),
        })
        .collect();
    let disc = (-params.c * dt).exp();

    let x: Vec<f64> = (0..=levels).map(|i| if i == levels { top } else { i as f64 * h }).collect();
    let mut values = Array2::zeros((steps + 1, levels + 1));
    for (i, &xi) in x.iter().enumerate() {
        values[[0, i]] = xi;
    }
    let mut barrier = vec![0.0; steps + 1];
    let mut payout = vec![false; levels + 1];

    for n in 1..=steps {
        let old = values.row(n - 1).to_owned();
        let mut row = vec![0.0; levels + 1];
        for i in 1..=levels {
            let above = if i == levels { old[levels] + h } else { old[i + 1] };
            let (here, below) = (old[i], old[i - 1]);
            let cont = probs
                .iter()
                .map(|p| p.up * above + p.down * below + (1.0 - p.up - p.down) * here)
                .fold(f64::NEG_INFINITY, f64::max)
                * disc;
            let pay = row[i - 1] + (x[i] - x[i - 1]);
            payout[i] = pay >= cont;
            row[i] = cont.max(pay);
        }
        values.row_mut(n).assign(&ndarray::ArrayView1::from(&row));
        // Lowest point of the terminal run of payout nodes.
        let mut first = levels + 1;
        for i in (1..=levels).rev() {
            if payout[i] {
                first = i;
            } else {
                break;
            }
        }
        barrier[n] = if first > levels { top } else { x[first - 1] };
    }

    McaTable {
        x,
        tau: (0..=steps).map(|n| n as f64 * dt).collect(),
        values,
        barrier,
        dt,
    }
}
