//! Pipelines behind the `reindiv` command: solve, extract boundaries,
//! simulate, and the full verification run.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::boundaries::{check_discrete_boundaries, discrete_claim_boundaries, FreeBoundaries};
use crate::claims::{ClaimDistribution, ModelParams};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::output::{self, level_label};
use crate::pde::{
    check_invariants, hjb_residual, mca_oracle, trivial_solution, InvariantReport, PenaltySolver, SolutionField,
    SolverOptions, SuiteResult, DEFAULT_TOL_INV,
};
use crate::policy::{simulate_paths, PolicyRun, RNG_ALGORITHM};

/// Relative agreement required between the Markov-chain oracle and the PDE.
pub const ORACLE_TOLERANCE: f64 = 0.05;
/// Relative slack of the Monte-Carlo comparison on top of three standard errors.
pub const MC_RELATIVE_SLACK: f64 = 0.02;

/// Outcome of a pipeline run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub mode: Mode,
    pub report: InvariantReport,
    pub files: Vec<String>,
    pub directory: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_passed() {
            0
        } else {
            4
        }
    }
}

/// Exit status for an error: 2 for bad input, 3 for a stalled solve,
/// 4 for a violated invariant, 1 for anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invalid { .. } | Error::Config(_) | Error::Json(_) | Error::NoRoot { .. } | Error::OutOfRegion { .. } => 2,
        Error::NonConvergence { .. } => 3,
        Error::InvariantBreach { .. } => 4,
        Error::Io(_) => 1,
    }
}

/// Solves the configured problem; the trivial regime uses the closed form.
/// Invariants are left to the caller so every suite can be reported.
pub fn solve_field(dist: &ClaimDistribution, params: &ModelParams, cfg: &RunConfig) -> Result<SolutionField> {
    if params.is_trivial(dist) {
        trivial_solution(dist, params, &cfg.grid)
    } else {
        PenaltySolver::new(dist, params, &cfg.grid)?
            .with_options(SolverOptions {
                check_invariants: false,
                ..Default::default()
            })
            .solve()
    }
}

/// Runs `mode` and writes its artifacts plus `manifest.json` into `out_dir`.
pub fn execute(mode: Mode, cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    let dist = cfg.distribution.build()?;
    let params = cfg.model;
    if mode == Mode::Simulate && cfg.simulation.is_none() {
        return Err(Error::invalid("simulation", "mode `simulate` needs a `simulation` section"));
    }
    fs::create_dir_all(out_dir)?;

    let field = solve_field(&dist, &params, cfg)?;
    let mut report = check_invariants(&field, DEFAULT_TOL_INV);
    let mut files = Vec::new();
    let mut extra = serde_json::Map::new();

    if matches!(mode, Mode::Solve | Mode::VerifyAll) {
        let stride = match cfg.outputs.solution_stride {
            0 => field.grid.nx.max(field.grid.nt).div_ceil(128),
            s => s,
        };
        output::write_solution(&out_dir.join("solution.csv"), &field, stride)?;
        files.push("solution.csv".to_string());
        let (_, residual) = hjb_residual(&field);
        extra.insert("residual".into(), serde_json::to_value(residual)?);
    }

    if matches!(mode, Mode::Boundaries | Mode::VerifyAll) {
        files.extend(boundaries(&field, cfg, &dist, out_dir, &mut report)?);
    }

    if matches!(mode, Mode::Simulate | Mode::VerifyAll) {
        if let Some(sim) = &cfg.simulation {
            let (run, paths) = simulate_paths(&field, &sim.run(), 0.0)?;
            output::write_json(&out_dir.join("policy_run.json"), &policy_json(&run))?;
            files.push("policy_run.json".to_string());
            if cfg.outputs.per_path {
                output::write_paths(&out_dir.join("paths.csv"), &paths)?;
                files.push("paths.csv".to_string());
            }
            if mode == Mode::VerifyAll {
                let allowed = 3.0 * run.stderr + MC_RELATIVE_SLACK * run.pde_value.abs();
                let gap = (run.estimate - run.pde_value).abs();
                report.push(SuiteResult::new("mc_value_consistency", gap, allowed));
                let mut suboptimal = Vec::new();
                for &delta in &sim.distortions {
                    let (other, _) = simulate_paths(&field, &sim.run(), delta)?;
                    let noise = 3.0 * run.stderr.hypot(other.stderr);
                    report.push(SuiteResult::new(
                        format!("mc_domination_{}", level_label(delta)),
                        (other.estimate - run.estimate).max(0.0),
                        noise,
                    ));
                    suboptimal.push(json!({"distortion": delta, "estimate": other.estimate, "stderr": other.stderr}));
                }
                extra.insert("suboptimal_runs".into(), Value::Array(suboptimal));
            }
            extra.insert("rng".into(), json!(RNG_ALGORITHM));
        }
    }

    if mode == Mode::VerifyAll {
        if let Some(oracle) = &cfg.oracle {
            let (gap, probes) = oracle_gap(&field, &dist, &params, oracle.options(), cfg)?;
            report.push(SuiteResult::new("mca_oracle_agreement", gap, ORACLE_TOLERANCE));
            extra.insert("oracle_probes".into(), Value::Array(probes));
        }
    }

    files.push("manifest.json".to_string());
    files.sort();
    let manifest = manifest_json(mode, cfg, &field, &report, &files, extra)?;
    output::write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(RunSummary {
        mode,
        report,
        files,
        directory: out_dir.to_path_buf(),
    })
}

fn boundaries(
    field: &SolutionField,
    cfg: &RunConfig,
    dist: &ClaimDistribution,
    out_dir: &Path,
    report: &mut InvariantReport,
) -> Result<Vec<String>> {
    let levels = cfg.reinsurance_levels(dist);
    let fb = FreeBoundaries::extract(field, &levels, cfg.boundaries.tol_fb)?;
    report.suites.extend(fb.check(field).suites);
    let atoms = match dist.atoms() {
        Some(_) => {
            let b = discrete_claim_boundaries(field)?;
            report.suites.extend(check_discrete_boundaries(field, &b).suites);
            Some(b)
        }
        None => None,
    };

    let mut files = vec!["dividend_boundary.csv".to_string(), "regions.csv".to_string()];
    output::write_dividend_boundary(&out_dir.join("dividend_boundary.csv"), &fb)?;
    for (z, k) in fb.reinsurance() {
        let name = format!("reinsurance_boundary_{}.csv", level_label(z));
        output::write_reinsurance_boundary(&out_dir.join(&name), &fb.dividend.tau, k)?;
        files.push(name);
    }
    let (rx, rt) = cfg.outputs.region_grid;
    output::write_regions(&out_dir.join("regions.csv"), field, &levels, rx, rt)?;
    files.extend(output::emit_figure_data(out_dir, field, &fb, atoms.as_ref())?);
    Ok(files)
}

/// Worst relative gap between oracle and PDE on a 3 by 3 probe grid: surplus
/// at fixed fractions of the final dividend barrier, three horizons.
fn oracle_gap(
    field: &SolutionField,
    dist: &ClaimDistribution,
    params: &ModelParams,
    opts: crate::pde::McaOptions,
    cfg: &RunConfig,
) -> Result<(f64, Vec<Value>)> {
    let table = mca_oracle(dist, params, &opts);
    let fb = FreeBoundaries::extract(field, &[], cfg.boundaries.tol_fb)?;
    let reach = fb.dividend.at(params.horizon).max(field.grid.dx);
    let mut worst = 0.0f64;
    let mut probes = Vec::new();
    for frac in [0.125, 0.375, 0.75] {
        for tfrac in [0.25, 0.5, 1.0] {
            let (x, tau) = (frac * reach, tfrac * params.horizon);
            let (pde, mca) = (field.v_at(x, tau), table.value_at(x, tau));
            let gap = (mca - pde).abs() / pde.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(gap);
            probes.push(json!({"x": x, "tau": tau, "pde": pde, "oracle": mca, "relative_gap": gap}));
        }
    }
    Ok((worst, probes))
}

pub fn policy_json(run: &PolicyRun) -> Value {
    json!({
        "estimate": run.estimate,
        "stderr": run.stderr,
        "n_paths": run.n_paths,
        "n_ruined": run.n_ruined,
        "pde_value": run.pde_value,
        "seed": run.seed,
        "dt": run.dt,
        "rng": run.rng,
    })
}

fn manifest_json(
    mode: Mode,
    cfg: &RunConfig,
    field: &SolutionField,
    report: &InvariantReport,
    files: &[String],
    extra: serde_json::Map<String, Value>,
) -> Result<Value> {
    let mut m = serde_json::Map::new();
    m.insert("package".into(), json!(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("mode".into(), json!(mode.as_str()));
    m.insert("config".into(), serde_json::to_value(cfg)?);
    m.insert("grid".into(), serde_json::to_value(field.grid)?);
    m.insert("trivial".into(), json!(field.is_trivial()));
    m.insert("lambda".into(), json!(field.lambda));
    m.insert("x2".into(), json!(field.bounds().x2));
    m.insert("max_picard_iterations".into(), json!(field.max_picard_iterations()));
    m.insert("suites".into(), serde_json::to_value(&report.suites)?);
    m.insert("all_passed".into(), json!(report.all_passed()));
    m.insert("files".into(), json!(files));
    m.extend(extra);
    Ok(Value::Object(m))
}

/// Command-line entry: loads the config, applies overrides, runs, and maps
/// the outcome to an exit status. Messages go to stdout/stderr.
pub fn run(mode: Mode, config: &Path, out: Option<&Path>, seed: Option<u64>) -> i32 {
    let outcome = RunConfig::load(config).and_then(|mut cfg| {
        if let Some(seed) = seed {
            match cfg.simulation.as_mut() {
                Some(sim) => sim.seed = seed,
                None => return Err(Error::invalid("simulation", "--seed given but the config has no simulation section")),
            }
        }
        let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
        execute(mode, &cfg, &dir)
    });
    match outcome {
        Ok(summary) => {
            let failed: Vec<&str> = summary.report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
            println!(
                "{}: {} checks, {} failed; {} files in {}",
                summary.mode.as_str(),
                summary.report.suites.len(),
                failed.len(),
                summary.files.len(),
                summary.directory.display()
            );
            for name in failed {
                let s = summary.report.get(name).expect("listed suite");
                eprintln!("FAILED {name}: defect {:.3e} > tolerance {:.3e}", s.worst_defect, s.tolerance);
            }
            summary.exit_code()
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}
