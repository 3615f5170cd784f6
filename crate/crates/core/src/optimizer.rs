//! Projected gradient ascent on the load reactances with a backtracking
//! quadratic-minorant line search.
//!
//! Each outer iteration takes the gradient at the current reactances `x`
//! and tries `x⁺ = P(x + μ∇f)`, where `P` clamps to the reactance box. The
//! trial is accepted once `f(x⁺) ≥ Q_μ(x⁺; x)` with
//! `Q_μ(y; x) = f(x) + ⟨∇f(x), y − x⟩ − ‖y − x‖² / (2μ)`; otherwise
//! `μ ← κμ` and the trial is recomputed (a do-while loop). The shrunk step
//! carries over to the next iteration and is restored to `μ_init` every
//! `reset_period` iterations.
//!
//! Because `P` is a projection onto a box, `⟨∇f, x⁺ − x⟩ ≥ ‖x⁺ − x‖²/μ`, so
//! `Q_μ(x⁺; x) ≥ f(x)` and every accepted step is non-decreasing.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{evaluate, phi_tr_bound, Bounds, ChannelEval, Link, RisLoad};
use crate::error::{Error, Result};
use crate::gradient::gradient;
use crate::impedance::ImpedanceSet;
use crate::metrics::MultCounter;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub mu_init: f64,
    pub kappa: f64,
    pub reset_period: usize,
    pub max_outer_iters: usize,
    /// Stop once the relative objective gain over the last `reset_period`
    /// iterations is below this.
    pub plateau_tol: f64,
    pub max_inner_loops: usize,
    /// When off, optimize against the model without RIS mutual coupling and
    /// report the result under the full model as well.
    pub coupling_aware: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            mu_init: 1e25,
            kappa: 0.5,
            reset_period: 1000,
            max_outer_iters: 1_000_000,
            plateau_tol: 1e-9,
            max_inner_loops: 200,
            coupling_aware: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_init > 0.0 && self.mu_init.is_finite()) {
            return Err(Error::Config(format!("mu_init must be > 0, got {}", self.mu_init)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::Config(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if self.reset_period == 0 {
            return Err(Error::Config("reset_period must be >= 1".into()));
        }
        if self.max_inner_loops == 0 {
            return Err(Error::Config("max_inner_loops must be >= 1".into()));
        }
        if !(self.plateau_tol >= 0.0) {
            return Err(Error::Config(format!(
                "plateau_tol must be >= 0, got {}",
                self.plateau_tol
            )));
        }
        Ok(())
    }
}

/// Clamps every reactance into `bounds`.
pub fn project(x: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter().map(|&v| bounds.clamp(v)).collect()
}

/// `Q_μ = f_n + ⟨∇f, Δ⟩ − ‖Δ‖²/(2μ)` with `Δ = x_trial − x_n` and the plain
/// inner product `⟨a, b⟩ = aᵀb`.
pub fn quadratic_model(f_n: f64, grad: &[f64], x_trial: &[f64], x_n: &[f64], mu: f64) -> f64 {
    let (mut lin, mut sq) = (0.0, 0.0);
    for ((g, t), x) in grad.iter().zip(x_trial).zip(x_n) {
        let d = t - x;
        lin += g * d;
        sq += d * d;
    }
    f_n + (lin - sq / (2.0 * mu))
}

/// `R₀ − j·Im(vect_d(Z_SS))`, clamped into the box.
pub fn default_initializer(iset: &ImpedanceSet, r0: f64, bounds: Bounds) -> Result<RisLoad> {
    let x = iset
        .z_ss
        .diagonal()
        .iter()
        .map(|z| bounds.clamp(-z.im))
        .collect();
    RisLoad::new(r0, x, bounds)
}

/// The impedances the coupling-unaware optimizer believes in.
pub fn unaware_counterpart(iset: &ImpedanceSet) -> ImpedanceSet {
    iset.without_ris_coupling()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub mu: f64,
    pub inner_loops: usize,
    pub cum_mults: u64,
}

/// One row per outer iteration; row 0 is the starting point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "iter,objective,mu,inner_loops,cum_mults";

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.iter)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }

    /// Mean number of trial evaluations per outer iteration.
    pub fn mean_inner_loops(&self) -> f64 {
        let steps = &self.rows[1.min(self.rows.len())..];
        if steps.is_empty() {
            return 0.0;
        }
        steps.iter().map(|r| r.inner_loops as f64).sum::<f64>() / steps.len() as f64
    }

    /// First iteration whose objective reaches `fraction` of the final one.
    pub fn iterations_to_fraction(&self, fraction: f64) -> Option<usize> {
        let target = fraction * self.final_objective()?;
        self.rows.iter().find(|r| r.objective >= target).map(|r| r.iter)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].objective >= w[0].objective)
    }

    /// CSV with 17 significant digits for every real column.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{},{}",
                r.iter, r.objective, r.mu, r.inner_loops, r.cum_mults
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Iterate and bookkeeping of a running optimization.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub iterate: RisLoad,
    pub eval: ChannelEval,
    pub mu: f64,
    pub n: usize,
    pub trace: ConvergenceTrace,
    pub counter: MultCounter,
    /// Cost of evaluating the starting point, charged to iteration 1.
    setup: Option<MultCounter>,
    pub near_singular_evals: usize,
    pub bound_violations: usize,
}

impl OptimizerState {
    pub fn new(link: &Link, init: RisLoad, cfg: &OptimizerConfig) -> Result<Self> {
        let mut setup = MultCounter::default();
        let eval = evaluate(link, &init, &mut setup)?;
        let trace = ConvergenceTrace {
            rows: vec![TraceRow {
                iter: 0,
                objective: eval.objective,
                mu: cfg.mu_init,
                inner_loops: 0,
                cum_mults: 0,
            }],
        };
        Ok(Self {
            near_singular_evals: usize::from(eval.near_singular()),
            iterate: init,
            eval,
            mu: cfg.mu_init,
            n: 0,
            trace,
            counter: MultCounter::default(),
            setup: Some(setup),
            bound_violations: 0,
        })
    }

    pub fn objective(&self) -> f64 {
        self.eval.objective
    }
}

/// One outer iteration: gradient, backtracking, bookkeeping, μ reset.
pub fn line_search_step(state: &mut OptimizerState, link: &Link, cfg: &OptimizerConfig) -> Result<()> {
    if let Some(setup) = state.setup.take() {
        state.counter.merge(&setup);
    }
    let grad = gradient(&state.eval, link, &mut state.counter).grad;
    let f_n = state.eval.objective;
    let x_n = &state.iterate.x;
    let bounds = state.iterate.bounds;

    let mut inner = 0;
    let (accepted, load, mu_used) = loop {
        inner += 1;
        let stepped: Vec<f64> = x_n.iter().zip(&grad).map(|(x, g)| x + state.mu * g).collect();
        let trial = state.iterate.with_reactances(project(&stepped, &bounds));
        let ev = evaluate(link, &trial, &mut state.counter)?;
        state.near_singular_evals += usize::from(ev.near_singular());
        let q = quadratic_model(f_n, &grad, &trial.x, x_n, state.mu);
        // the second test only guards against rounding in Q, which is ≥ f_n
        if ev.objective.is_finite() && ev.objective >= q && ev.objective >= f_n {
            break (ev, trial, state.mu);
        }
        if inner >= cfg.max_inner_loops {
            return Err(Error::Stall {
                iteration: state.n + 1,
                inner_loops: inner,
                mu: state.mu,
                trial_objective: ev.objective,
                minorant: q,
                current: f_n,
            });
        }
        state.mu *= cfg.kappa;
    };

    let bound = phi_tr_bound(&link.impedances, load.r0);
    if accepted.phi_tr.norm() > bound {
        state.bound_violations += 1;
        log::debug!(
            "iteration {}: |phi_TR| = {:e} exceeds continuity bound {:e}",
            state.n + 1,
            accepted.phi_tr.norm(),
            bound
        );
    }
    assert!(
        accepted.objective >= f_n,
        "objective decreased from {f_n:e} to {:e}",
        accepted.objective
    );

    state.iterate = load;
    state.eval = accepted;
    state.n += 1;
    state.trace.rows.push(TraceRow {
        iter: state.n,
        objective: state.eval.objective,
        mu: mu_used,
        inner_loops: inner,
        cum_mults: state.counter.total(),
    });
    if state.n % cfg.reset_period == 0 {
        state.mu = cfg.mu_init;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    Plateau,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub load: RisLoad,
    /// Objective of the model that was optimized.
    pub objective: f64,
    /// Objective of the final load under the full coupling model. Equal to
    /// `objective` for coupling-aware runs.
    pub evaluated_objective: f64,
    pub initial_objective: f64,
    pub trace: ConvergenceTrace,
    pub stop_reason: StopReason,
    pub counter: MultCounter,
    pub near_singular_evals: usize,
    pub bound_violations: usize,
}

impl OptimizeOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.iterations()
    }
}

fn plateaued(trace: &ConvergenceTrace, window: usize, tol: f64) -> bool {
    let rows = &trace.rows;
    let n = rows.len() - 1;
    if n == 0 {
        return false;
    }
    let now = rows[n].objective;
    let then = rows[n - window.min(n)].objective;
    let gain = if then != 0.0 {
        (now - then) / then.abs()
    } else if now > then {
        f64::INFINITY
    } else {
        0.0
    };
    gain < tol
}

/// Runs the projected-gradient method from `init`.
///
/// Stops after `max_outer_iters` iterations or once the relative gain over
/// the last `reset_period` iterations (or all iterations, early on) falls
/// below `plateau_tol`.
pub fn optimize(link: &Link, init: &RisLoad, cfg: &OptimizerConfig) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    if init.len() != link.n_ris() {
        return Err(Error::Dimension(format!(
            "initial load has {} reactances for {} RIS elements",
            init.len(),
            link.n_ris()
        )));
    }
    let unaware;
    let model = if cfg.coupling_aware {
        link
    } else {
        unaware = link.without_ris_coupling();
        &unaware
    };

    let mut state = OptimizerState::new(model, init.clone(), cfg)?;
    let initial_objective = state.objective();
    let stop_reason = loop {
        if state.n >= cfg.max_outer_iters {
            break StopReason::MaxIterations;
        }
        line_search_step(&mut state, model, cfg)?;
        if plateaued(&state.trace, cfg.reset_period, cfg.plateau_tol) {
            break StopReason::Plateau;
        }
    };

    let evaluated_objective = if cfg.coupling_aware {
        state.objective()
    } else {
        evaluate(link, &state.iterate, &mut MultCounter::default())?.objective
    };
    Ok(OptimizeOutcome {
        objective: state.objective(),
        evaluated_objective,
        initial_objective,
        load: state.iterate,
        trace: state.trace,
        stop_reason,
        counter: state.counter,
        near_singular_evals: state.near_singular_evals,
        bound_violations: state.bound_violations,
    })
}
