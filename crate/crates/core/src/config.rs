//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": { "gamma": 0.25, "c": 0.1, "T": 1.0 },
//!   "distribution": { "kind": "point_mass", "z": 1.0 },
//!   "grid": { "Nx": 1024, "Nt": 1024, "epsilon": 0.01 },
//!   "boundaries": { "levels": [1.0, 2.0] },
//!   "simulation": { "n_paths": 100000, "seed": 42, "x0": 0.75, "t0": 0.0 },
//!   "oracle": { "levels": 128, "controls": 16 },
//!   "outputs": { "directory": "out" }
//! }
//! ```
//!
//! `distribution.kind` is one of `point_mass` (`z`), `discrete`
//! (`atoms: [[z, p], ...]`), `exponential` (`mean`) or `uniform` (`upper`).
//! Only `model`, `distribution` and `grid` are required.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundaries::DEFAULT_TOL_FB;
use crate::claims::{ClaimDistribution, ModelParams};
use crate::error::{Error, Result};
use crate::pde::{Grid, GridSpec, McaOptions};
use crate::policy::SimConfig;

/// Environment variable that overrides `outputs.directory`.
pub const OUT_DIR_ENV: &str = "REINDIV_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Boundaries,
    Simulate,
    VerifyAll,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Boundaries => "boundaries",
            Mode::Simulate => "simulate",
            Mode::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    PointMass { z: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
    Exponential { mean: f64 },
    Uniform { upper: f64 },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<ClaimDistribution> {
        match self {
            DistributionSpec::PointMass { z } => ClaimDistribution::point_mass(*z),
            DistributionSpec::Discrete { atoms } => ClaimDistribution::discrete(atoms),
            DistributionSpec::Exponential { mean } => ClaimDistribution::exponential(*mean),
            DistributionSpec::Uniform { upper } => ClaimDistribution::uniform(*upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default = "default_tol_fb")]
    pub tol_fb: f64,
    /// Claim sizes for which `K(z, tau)` is written. Empty selects the atoms
    /// of a discrete law, or `{0.5, 1, 2} * mu1` otherwise.
    #[serde(default)]
    pub levels: Vec<f64>,
}

fn default_tol_fb() -> f64 {
    DEFAULT_TOL_FB
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            tol_fb: DEFAULT_TOL_FB,
            levels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_paths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub seed: u64,
    pub x0: f64,
    #[serde(default)]
    pub t0: f64,
    /// Distortions for the sub-optimal comparison runs in `verify-all`.
    #[serde(default = "default_distortions")]
    pub distortions: Vec<f64>,
}

impl SimulationConfig {
    pub fn run(&self) -> SimConfig {
        SimConfig {
            n_paths: self.n_paths,
            dt: self.dt,
            seed: self.seed,
            x0: self.x0,
            t0: self.t0,
        }
    }
}

fn default_distortions() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_oracle_levels")]
    pub levels: usize,
    #[serde(default = "default_oracle_controls")]
    pub controls: usize,
}

fn default_oracle_levels() -> usize {
    128
}

fn default_oracle_controls() -> usize {
    16
}

impl OracleConfig {
    pub fn options(&self) -> McaOptions {
        McaOptions {
            levels: self.levels,
            controls: self.controls,
            top: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    /// Keep every `stride`-th node of the solution in `solution.csv`; `0` picks
    /// a stride that leaves about 128 nodes per direction.
    #[serde(default)]
    pub solution_stride: usize,
    /// `[nx, nt]` cells of the region map.
    #[serde(default = "default_region_grid")]
    pub region_grid: (usize, usize),
    /// Write `paths.csv` with one row per simulated path.
    #[serde(default)]
    pub per_path: bool,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_region_grid() -> (usize, usize) {
    (64, 32)
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            solution_stride: 0,
            region_grid: default_region_grid(),
            per_path: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; the command line chooses the mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub model: ModelParams,
    pub distribution: DistributionSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub boundaries: BoundaryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl RunConfig {
    /// Parses and validates; errors name the offending field and, for syntax
    /// and type errors, the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::invalid(path, inner.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every numeric constraint that does not need a solve.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let dist = self.distribution.build()?;
        Grid::new(&self.grid, &dist, &self.model)?;
        let b = &self.boundaries;
        if !(b.tol_fb > 0.0 && b.tol_fb < 1.0) {
            return Err(Error::invalid("boundaries.tol_fb", format!("must lie in (0, 1), got {}", b.tol_fb)));
        }
        for (j, z) in b.levels.iter().enumerate() {
            if !(z.is_finite() && *z > 0.0) {
                return Err(Error::invalid(format!("boundaries.levels[{j}]"), format!("must be finite and > 0, got {z}")));
            }
        }
        if let Some(sim) = &self.simulation {
            let s = sim.run();
            if s.n_paths < 100 {
                return Err(Error::invalid("simulation.n_paths", format!("need at least 100 paths, got {}", s.n_paths)));
            }
            if !(s.x0.is_finite() && s.x0 > 0.0) {
                return Err(Error::invalid("simulation.x0", format!("must be finite and > 0, got {}", s.x0)));
            }
            if !(s.t0 >= 0.0 && s.t0 <= self.model.horizon) {
                return Err(Error::invalid(
                    "simulation.t0",
                    format!("must lie in [0, {}], got {}", self.model.horizon, s.t0),
                ));
            }
            let dtau = self.model.horizon / self.grid.nt as f64;
            let dt = s.resolved_dt(self.model.horizon);
            if !(dt > 0.0 && dt <= dtau * (1.0 + 1e-12)) {
                return Err(Error::invalid(
                    "simulation.dt",
                    format!("must lie in (0, {dtau:.6e}] (the grid time step), got {dt:.6e}"),
                ));
            }
            for (j, d) in sim.distortions.iter().enumerate() {
                if !(d.is_finite() && *d >= 0.0) {
                    return Err(Error::invalid(format!("simulation.distortions[{j}]"), format!("must be >= 0, got {d}")));
                }
            }
        }
        if let Some(o) = &self.oracle {
            if o.levels < 8 {
                return Err(Error::invalid("oracle.levels", format!("need at least 8 levels, got {}", o.levels)));
            }
            if o.controls < 1 {
                return Err(Error::invalid("oracle.controls", "need at least one control"));
            }
        }
        let (rx, rt) = self.outputs.region_grid;
        if rx == 0 || rt == 0 {
            return Err(Error::invalid("outputs.region_grid", "both counts must be positive"));
        }
        Ok(())
    }

    /// Claim levels for the reinsurance boundaries, ascending and deduplicated.
    pub fn reinsurance_levels(&self, dist: &ClaimDistribution) -> Vec<f64> {
        let mut levels = if !self.boundaries.levels.is_empty() {
            self.boundaries.levels.clone()
        } else if let Some(atoms) = dist.atoms() {
            atoms.iter().map(|a| a.z).collect()
        } else {
            [0.5, 1.0, 2.0].iter().map(|k| k * dist.mu1()).collect()
        };
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    /// Output directory after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.outputs.directory.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"gamma": 0.25, "c": 0.1, "T": 1.0},
        "distribution": {"kind": "discrete", "atoms": [[0.5, 0.3], [2.0, 0.7]]},
        "grid": {"Nx": 128, "Nt": 64, "epsilon": 0.02}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.outputs.directory, PathBuf::from("out"));
        assert_eq!(cfg.boundaries.tol_fb, DEFAULT_TOL_FB);
        assert!(cfg.simulation.is_none());
        let dist = cfg.distribution.build().unwrap();
        assert_eq!(cfg.reinsurance_levels(&dist), vec![0.5, 2.0]);
    }

    #[test]
    fn bad_probabilities_name_the_field() {
        let text = MINIMAL.replace("0.7]", "0.6]");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("distribution.atoms"), "{err}");
    }

    #[test]
    fn type_errors_carry_path_and_line() {
        let text = MINIMAL.replace("\"Nx\": 128", "\"Nx\": \"many\"");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("grid.Nx") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("\"epsilon\"", "\"eps\": 1, \"epsilon\"");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("grid"), "{err}");
    }

    #[test]
    fn simulation_step_must_fit_grid() {
        let text = MINIMAL.replace(
            "\"grid\"",
            "\"simulation\": {\"n_paths\": 1000, \"seed\": 1, \"x0\": 1.0, \"dt\": 0.05}, \"grid\"",
        );
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("simulation.dt"), "{err}");
    }
}
