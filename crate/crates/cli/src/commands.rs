//! The three batch commands. Each takes a validated config and an output
//! directory; the `run_*` variants do the work without touching the
//! output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use risopt::em::{build_grid_scenario, RisLayout};
use risopt::optimizer::{default_initializer, StopReason};
use risopt::{optimize, Link, MultCounter, OptimizeOutcome, OptimizerConfig};
use serde::{Deserialize, Serialize};

use crate::cache::{cache_dir, cached_impedances, scenario_impedances};
use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const IMPEDANCE_FILE: &str = "impedances.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep_spacing.csv";
pub const SWEEP_HEADER: &str = "spacing,n_ris,objective_aware,objective_unaware";

/// Per-invocation overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub coupling_unaware: bool,
    pub max_iters: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &ScenarioConfig) -> OptimizerConfig {
        let mut opt = cfg.optimizer;
        opt.coupling_aware &= cfg.coupling_aware && !self.coupling_unaware;
        if let Some(n) = self.max_iters {
            opt.max_outer_iters = n;
        }
        opt
    }
}

/// Run record written next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_ris: usize,
    pub r0_ohm: f64,
    pub coupling_aware: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub initial_objective: f64,
    /// Objective of the optimized model at the returned load.
    pub final_objective: f64,
    /// Objective of the returned load under full coupling; differs from
    /// `final_objective` only for coupling-unaware runs.
    pub evaluated_objective: f64,
    /// Set for coupling-unaware runs: the same as `evaluated_objective`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unaware_evaluated_objective: Option<f64>,
    /// First iteration reaching 95% of the final objective.
    pub iterations_to_95pct: Option<usize>,
    pub mean_inner_loops: f64,
    pub total_multiplications: u64,
    pub multiplications: MultCounter,
    pub near_singular_evaluations: usize,
    pub bound_diagnostic_violations: usize,
    pub reactances_ohm: Vec<f64>,
}

impl RunSummary {
    fn new(n_ris: usize, r0: f64, out: &OptimizeOutcome, aware: bool) -> Self {
        Self {
            n_ris,
            r0_ohm: r0,
            coupling_aware: aware,
            iterations: out.iterations(),
            stop_reason: out.stop_reason,
            initial_objective: out.initial_objective,
            final_objective: out.objective,
            evaluated_objective: out.evaluated_objective,
            unaware_evaluated_objective: (!aware).then_some(out.evaluated_objective),
            iterations_to_95pct: out.trace.iterations_to_fraction(0.95),
            mean_inner_loops: out.trace.mean_inner_loops(),
            total_multiplications: out.counter.total(),
            multiplications: out.counter,
            near_singular_evaluations: out.near_singular_evals,
            bound_diagnostic_violations: out.bound_violations,
            reactances_ohm: out.load.x.clone(),
        }
    }
}

fn create_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(CliError::io(format!("creating {}", out.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Writes the scenario's impedances to `out/impedances.json`.
pub fn gen_impedances(cfg: &ScenarioConfig, out: &Path) -> Result<PathBuf, CliError> {
    let set = scenario_impedances(cfg)?;
    create_out_dir(out)?;
    let path = out.join(IMPEDANCE_FILE);
    set.save(&path)?;
    log::info!("wrote {} ({} RIS elements)", path.display(), set.n_ris());
    Ok(path)
}

/// Optimizes the configured scenario from the default initializer.
pub fn run_optimize(
    cfg: &ScenarioConfig,
    overrides: Overrides,
) -> Result<(OptimizeOutcome, RunSummary), CliError> {
    let iset = scenario_impedances(cfg)?;
    let n = iset.n_ris();
    let link = Link::new(iset, cfg.z_g(), cfg.z_l());
    let opt = overrides.apply(cfg);
    let init = default_initializer(&link.impedances, cfg.r0_ohm, cfg.bounds()?)?;
    let outcome = optimize(&link, &init, &opt)?;
    let summary = RunSummary::new(n, cfg.r0_ohm, &outcome, opt.coupling_aware);
    Ok((outcome, summary))
}

/// Runs [`run_optimize`] and writes `trace.csv` and `summary.json`.
pub fn optimize_cmd(
    cfg: &ScenarioConfig,
    out: &Path,
    overrides: Overrides,
) -> Result<RunSummary, CliError> {
    let (outcome, summary) = run_optimize(cfg, overrides)?;
    create_out_dir(out)?;
    write(&out.join(TRACE_FILE), &outcome.trace.to_csv())?;
    let json = serde_json::to_string_pretty(&summary).map_err(risopt::Error::from)?;
    write(&out.join(SUMMARY_FILE), &json)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub n_ris: usize,
    pub objective_aware: f64,
    /// Objective under full coupling of the load optimized without it.
    pub objective_unaware: f64,
}

fn sweep_point(
    cfg: &ScenarioConfig,
    spacing: f64,
    equal_length: bool,
    overrides: Overrides,
) -> Result<SweepRow, CliError> {
    let mut geometry = cfg.geometry;
    let RisLayout::Aperture { aperture_m, .. } = geometry.ris else {
        return Err(CliError::Config(
            "sweep-spacing needs geometry.ris = { aperture_m, spacing_wavelengths }".into(),
        ));
    };
    geometry.ris = RisLayout::Aperture {
        aperture_m,
        spacing_wavelengths: spacing,
    };
    if equal_length {
        geometry.element.length_wavelengths = spacing;
    }
    let n_ris = build_grid_scenario(&geometry, cfg.z_g(), cfg.z_l())?.n_ris();
    let iset = cached_impedances(&cache_dir(), &geometry, cfg)?;
    let link = Link::new(iset, cfg.z_g(), cfg.z_l());
    let init = default_initializer(&link.impedances, cfg.r0_ohm, cfg.bounds()?)?;
    let mut opt = overrides.apply(cfg);
    opt.coupling_aware = true;
    let aware = optimize(&link, &init, &opt)?;
    opt.coupling_aware = false;
    let unaware = optimize(&link, &init, &opt)?;
    log::info!(
        "spacing {spacing}: N = {n_ris}, aware {:e}, unaware {:e}",
        aware.evaluated_objective,
        unaware.evaluated_objective
    );
    Ok(SweepRow {
        spacing,
        n_ris,
        objective_aware: aware.evaluated_objective,
        objective_unaware: unaware.evaluated_objective,
    })
}

/// One row per configured spacing, largest spacing first, computed on up
/// to `jobs` threads.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    jobs: usize,
    overrides: Overrides,
) -> Result<Vec<SweepRow>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep-spacing needs a [sweep] table".into()))?;
    if cfg.impedance_file.is_some() {
        log::warn!("impedance_file is ignored by sweep-spacing");
    }
    let mut spacings = sweep.spacings_wavelengths.clone();
    spacings.sort_by(|a, b| b.total_cmp(a));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| {
        spacings
            .par_iter()
            .map(|&s| sweep_point(cfg, s, sweep.element_length_equals_spacing, overrides))
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e}\n",
            r.spacing, r.n_ris, r.objective_aware, r.objective_unaware
        ));
    }
    out
}

/// Runs [`run_sweep`] and writes `sweep_spacing.csv`.
pub fn sweep_spacing_cmd(
    cfg: &ScenarioConfig,
    out: &Path,
    jobs: usize,
    overrides: Overrides,
) -> Result<Vec<SweepRow>, CliError> {
    let rows = run_sweep(cfg, jobs, overrides)?;
    create_out_dir(out)?;
    write(&out.join(SWEEP_FILE), &sweep_csv(&rows))?;
    Ok(rows)
}
