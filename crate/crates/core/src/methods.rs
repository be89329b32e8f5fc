//! The optimizers: SSN-CG, Newton-Sketch, SSN-SGI, SVRG, plus Armijo
//! backtracking and a high-accuracy reference Newton-CG for computing
//! `F*`.
//!
//! Cost accounting: every run owns an [`OracleCounter`]; cumulative
//! effective gradient evaluations reported in the trace are exactly the
//! counted units over `n`. Line-search methods charge one full function
//! evaluation (`n` units) per backtracking trial plus one at
//! initialization; trace instrumentation (training error, test loss) is
//! never charged. Sketch construction is excluded from the count (its
//! wall time lands in the per-iteration `wall_ms` column).

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linops::{axpy, dot, nrm2};
use crate::problem::{mean_logistic_loss, LogisticModel, OracleCounter};
use crate::rng::{derive_seed_indexed, sample_without_replacement, SplitMix64};
use crate::sketch::{build_sketched_sqrt, RosSketch};
use crate::solvers::{cg, sgi};

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineSearchParams {
    pub c1: f64,
    pub rho: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            rho: 0.5,
            max_backtracks: 50,
        }
    }
}

/// Which optimizer to run, with its two tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodVariant {
    SsnCg {
        t: usize,
        max_cg: usize,
        zeta: f64,
    },
    NewtonSketch {
        m_ns: usize,
        max_cg: usize,
        zeta: f64,
    },
    SsnSgi {
        m_sgi: usize,
        alpha_inner: f64,
    },
    Svrg {
        alpha: f64,
        m_svrg: usize,
    },
}

impl MethodVariant {
    pub fn name(&self) -> &'static str {
        match self {
            MethodVariant::SsnCg { .. } => "ssn-cg",
            MethodVariant::NewtonSketch { .. } => "newton-sketch",
            MethodVariant::SsnSgi { .. } => "ssn-sgi",
            MethodVariant::Svrg { .. } => "svrg",
        }
    }

    /// Short parameter label for file names and grid reports.
    pub fn param_label(&self) -> String {
        match self {
            MethodVariant::SsnCg { t, max_cg, .. } => format!("t{t}-cg{max_cg}"),
            MethodVariant::NewtonSketch { m_ns, max_cg, .. } => format!("m{m_ns}-cg{max_cg}"),
            MethodVariant::SsnSgi { m_sgi, alpha_inner } => {
                format!("m{m_sgi}-a{alpha_inner:e}")
            }
            MethodVariant::Svrg { alpha, m_svrg } => format!("m{m_svrg}-a{alpha:e}"),
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodConfig {
    pub variant: MethodVariant,
    pub max_outer: usize,
    pub grad_tol: f64,
    pub seed: u64,
    #[serde(default)]
    pub line_search: LineSearchParams,
}

impl MethodConfig {
    pub fn new(variant: MethodVariant, max_outer: usize, grad_tol: f64, seed: u64) -> Self {
        Self {
            variant,
            max_outer,
            grad_tol,
            seed,
            line_search: LineSearchParams::default(),
        }
    }
}

/// One outer iteration (or SVRG cycle) of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Cumulative effective gradient evaluations (counted units / n).
    pub cum_ege: f64,
    /// `F(w_k) - F*`.
    pub train_error: f64,
    /// Mean unregularized logistic loss on the test split (NaN if none).
    pub test_loss: f64,
    pub step_len: f64,
    pub inner_iters: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    MaxOuter,
    Diverged { iter: usize },
    LineSearchFailed { iter: usize },
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Converged => write!(f, "converged"),
            RunStatus::MaxOuter => write!(f, "max-outer"),
            RunStatus::Diverged { iter } => write!(f, "diverged@{iter}"),
            RunStatus::LineSearchFailed { iter } => write!(f, "line-search-failed@{iter}"),
        }
    }
}

/// Per-run record: one row per outer iteration plus terminal state.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub method: String,
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    pub f_star: f64,
    pub final_w: Vec<f64>,
    pub counter: OracleCounter,
}

impl RunTrace {
    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.train_error)
    }

    /// Cumulative EGE of the first row at or below the error threshold.
    pub fn ege_to(&self, threshold: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.train_error <= threshold)
            .map(|r| r.cum_ege)
    }

    pub fn failed(&self) -> bool {
        matches!(
            self.status,
            RunStatus::Diverged { .. } | RunStatus::LineSearchFailed { .. }
        )
    }
}

/// Result of one Armijo backtracking search.
#[derive(Debug, Clone, Copy)]
pub struct ArmijoResult {
    pub alpha: f64,
    /// `F(w + alpha p)` at the accepted step, so callers reuse it.
    pub f_new: f64,
    /// Number of function-evaluation trials performed.
    pub trials: u64,
}

/// Armijo backtracking over a generic objective. Starts at the unit step
/// and accepts the first `alpha` in `{1, rho, rho^2, ...}` with
/// `F(w + alpha p) <= F(w) + c1 alpha <g, p>`.
pub fn armijo_with<F>(
    mut value: F,
    w: &[f64],
    p: &[f64],
    g: &[f64],
    f_w: f64,
    ls: &LineSearchParams,
) -> Result<ArmijoResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let slope = dot(g, p);
    if !(slope < 0.0) {
        return Err(Error::LineSearch(format!(
            "not a descent direction (g.p = {slope:e})"
        )));
    }
    let mut alpha = 1.0;
    let mut trial = vec![0.0; w.len()];
    for k in 0..=ls.max_backtracks {
        trial.copy_from_slice(w);
        axpy(alpha, p, &mut trial);
        let f_trial = value(&trial)?;
        if f_trial <= f_w + ls.c1 * alpha * slope {
            return Ok(ArmijoResult {
                alpha,
                f_new: f_trial,
                trials: k as u64 + 1,
            });
        }
        alpha *= ls.rho;
    }
    Err(Error::LineSearch(format!(
        "no acceptable step within {} backtracks",
        ls.max_backtracks
    )))
}

/// Armijo on the model objective; every trial charges `n` function-eval
/// units through the counter.
pub fn armijo(
    model: &LogisticModel,
    w: &[f64],
    p: &[f64],
    g: &[f64],
    f_w: f64,
    ls: &LineSearchParams,
    counter: &mut OracleCounter,
) -> Result<ArmijoResult> {
    armijo_with(|x| model.value(x, counter), w, p, g, f_w, ls)
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn test_loss_of(test: Option<&Dataset>, w: &[f64]) -> f64 {
    match test {
        Some(ds) => mean_logistic_loss(ds, w).unwrap_or(f64::NAN),
        None => f64::NAN,
    }
}

/// Shared outer loop for the three Newton-type methods: full gradient,
/// direction from `dir_fn`, Armijo step, one trace row per iteration.
fn newton_style_run<D>(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
    mut dir_fn: D,
) -> Result<RunTrace>
where
    D: FnMut(usize, &[f64], &[f64], &mut OracleCounter) -> Result<(Vec<f64>, usize)>,
{
    let mut counter = OracleCounter::new();
    let mut w = w0.to_vec();
    let n = model.n();

    let start = Instant::now();
    let mut f_w = model.value(&w, &mut counter)?;
    let mut rows = vec![TraceRow {
        iter: 0,
        cum_ege: counter.ege(n),
        train_error: f_w - f_star,
        test_loss: test_loss_of(test, &w),
        step_len: 0.0,
        inner_iters: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }];

    let mut status = RunStatus::MaxOuter;
    for k in 1..=cfg.max_outer {
        let t0 = Instant::now();
        let g = model.gradient(&w, &mut counter)?;
        if !finite(&g) {
            status = RunStatus::Diverged { iter: k };
            break;
        }
        if nrm2(&g) <= cfg.grad_tol {
            status = RunStatus::Converged;
            break;
        }
        let (p, inner) = match dir_fn(k, &w, &g, &mut counter) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) => {
                status = RunStatus::Diverged { iter: k };
                break;
            }
            Err(e) => return Err(e),
        };
        let ar = match armijo(model, &w, &p, &g, f_w, &cfg.line_search, &mut counter) {
            Ok(a) => a,
            Err(Error::LineSearch(_)) => {
                status = RunStatus::LineSearchFailed { iter: k };
                break;
            }
            Err(e) => return Err(e),
        };
        axpy(ar.alpha, &p, &mut w);
        f_w = ar.f_new;
        if !f_w.is_finite() || !finite(&w) {
            status = RunStatus::Diverged { iter: k };
            break;
        }
        rows.push(TraceRow {
            iter: k,
            cum_ege: counter.ege(n),
            train_error: f_w - f_star,
            test_loss: test_loss_of(test, &w),
            step_len: ar.alpha,
            inner_iters: inner,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
    }

    Ok(RunTrace {
        method: cfg.variant.name().to_string(),
        rows,
        status,
        f_star,
        final_w: w,
        counter,
    })
}

/// Subsampled Newton-CG: at each outer iteration a fresh uniform subset
/// (without replacement, size `t`) defines the Hessian estimate, and CG
/// solves the Newton system to the residual test or `max_cg` iterations.
pub fn run_ssn_cg(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
) -> Result<RunTrace> {
    let MethodVariant::SsnCg { t, max_cg, zeta } = cfg.variant else {
        return Err(Error::InvalidParam("config variant is not ssn-cg".into()));
    };
    if t == 0 || t > model.n() {
        return Err(Error::InvalidParam(format!(
            "subsample size {t} outside [1, n={}]",
            model.n()
        )));
    }
    let seed = cfg.seed;
    newton_style_run(model, test, w0, cfg, f_star, move |k, w, g, counter| {
        let mut rng = SplitMix64::new(derive_seed_indexed(seed, "ssn-cg/subset", k as u64));
        let subset = sample_without_replacement(&mut rng, model.n(), t);
        let b: Vec<f64> = g.iter().map(|&v| -v).collect();
        let res = cg(|v| model.hess_vec(w, v, &subset, counter), &b, max_cg, zeta)?;
        Ok((res.solution, res.iters_used))
    })
}

/// Newton-Sketch: a fresh randomized Hadamard sketch per iteration
/// defines `B`, and CG runs on `(1/m) B^T B + lambda I`. Building `B` is
/// not charged to the evaluation count; its wall time lands in the row.
pub fn run_newton_sketch(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
) -> Result<RunTrace> {
    let MethodVariant::NewtonSketch { m_ns, max_cg, zeta } = cfg.variant else {
        return Err(Error::InvalidParam(
            "config variant is not newton-sketch".into(),
        ));
    };
    if m_ns == 0 {
        return Err(Error::InvalidParam("m_ns must be >= 1".into()));
    }
    let seed = cfg.seed;
    newton_style_run(model, test, w0, cfg, f_star, move |k, w, g, counter| {
        let sketch_seed = derive_seed_indexed(seed, "newton-sketch/sketch", k as u64);
        let sketch = RosSketch::new(model.n(), m_ns, sketch_seed)?;
        let bs = build_sketched_sqrt(model, w, &sketch, k as u64)?;
        let b: Vec<f64> = g.iter().map(|&v| -v).collect();
        let res = cg(|v| bs.hess_vec(v, counter), &b, max_cg, zeta)?;
        Ok((res.solution, res.iters_used))
    })
}

/// Subsampled Newton with the stochastic gradient inner iteration.
pub fn run_ssn_sgi(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
) -> Result<RunTrace> {
    let MethodVariant::SsnSgi { m_sgi, alpha_inner } = cfg.variant else {
        return Err(Error::InvalidParam("config variant is not ssn-sgi".into()));
    };
    let seed = cfg.seed;
    newton_style_run(model, test, w0, cfg, f_star, move |k, w, g, counter| {
        let inner_seed = derive_seed_indexed(seed, "ssn-sgi/inner", k as u64);
        let p = sgi(model, w, g, m_sgi, alpha_inner, inner_seed, counter)?;
        Ok((p, m_sgi))
    })
}

/// SVRG (Option I: the next snapshot is the last inner iterate). One
/// trace row per cycle; the cycle costs `n + 2 m_svrg` component
/// gradient units. Training error per cycle is instrumentation and not
/// charged.
pub fn run_svrg(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
) -> Result<RunTrace> {
    let MethodVariant::Svrg { alpha, m_svrg } = cfg.variant else {
        return Err(Error::InvalidParam("config variant is not svrg".into()));
    };
    if !(alpha > 0.0) {
        return Err(Error::InvalidParam(format!(
            "svrg alpha {alpha} must be > 0"
        )));
    }
    if m_svrg == 0 {
        return Err(Error::InvalidParam("m_svrg must be >= 1".into()));
    }
    let n = model.n();
    let mut counter = OracleCounter::new();
    let mut scratch = OracleCounter::new();
    let mut snapshot = w0.to_vec();

    let start = Instant::now();
    let mut rows = vec![TraceRow {
        iter: 0,
        cum_ege: 0.0,
        train_error: model.value(&snapshot, &mut scratch)? - f_star,
        test_loss: test_loss_of(test, &snapshot),
        step_len: 0.0,
        inner_iters: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }];

    let mut status = RunStatus::MaxOuter;
    for cycle in 1..=cfg.max_outer {
        let t0 = Instant::now();
        let g_bar = model.gradient(&snapshot, &mut counter)?;
        if !finite(&g_bar) {
            status = RunStatus::Diverged { iter: cycle };
            break;
        }
        if nrm2(&g_bar) <= cfg.grad_tol {
            status = RunStatus::Converged;
            break;
        }
        let mut rng = SplitMix64::new(derive_seed_indexed(cfg.seed, "svrg/cycle", cycle as u64));
        let mut w = snapshot.clone();
        for _ in 0..m_svrg {
            let i = rng.random_range(0..n);
            let gi = model.grad_component(&w, i, &mut counter)?;
            let gi_snap = model.grad_component(&snapshot, i, &mut counter)?;
            for j in 0..w.len() {
                w[j] -= alpha * (gi[j] - gi_snap[j] + g_bar[j]);
            }
        }
        if !finite(&w) {
            status = RunStatus::Diverged { iter: cycle };
            break;
        }
        snapshot = w;
        rows.push(TraceRow {
            iter: cycle,
            cum_ege: counter.ege(n),
            train_error: model.value(&snapshot, &mut scratch)? - f_star,
            test_loss: test_loss_of(test, &snapshot),
            step_len: alpha,
            inner_iters: m_svrg,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        if !rows.last().unwrap().train_error.is_finite() {
            status = RunStatus::Diverged { iter: cycle };
            break;
        }
    }

    Ok(RunTrace {
        method: "svrg".to_string(),
        rows,
        status,
        f_star,
        final_w: snapshot,
        counter,
    })
}

/// Dispatches on the config variant.
pub fn run_method(
    model: &LogisticModel,
    test: Option<&Dataset>,
    w0: &[f64],
    cfg: &MethodConfig,
    f_star: f64,
) -> Result<RunTrace> {
    match cfg.variant {
        MethodVariant::SsnCg { .. } => run_ssn_cg(model, test, w0, cfg, f_star),
        MethodVariant::NewtonSketch { .. } => run_newton_sketch(model, test, w0, cfg, f_star),
        MethodVariant::SsnSgi { .. } => run_ssn_sgi(model, test, w0, cfg, f_star),
        MethodVariant::Svrg { .. } => run_svrg(model, test, w0, cfg, f_star),
    }
}

/// High-accuracy solution used as ground truth for trace reporting.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub w_star: Vec<f64>,
    pub f_star: f64,
    pub grad_norm: f64,
    pub iters: usize,
}

const REFERENCE_MAX_OUTER: usize = 200;

/// Newton-CG with the full Hessian, CG residual `1e-14`, and Armijo
/// steps, run to `||grad|| <= tol`. Requires `lambda > 0` so the
/// objective is strongly convex and the optimum unique.
pub fn run_reference_newton(
    model: &LogisticModel,
    w0: &[f64],
    tol: f64,
) -> Result<ReferenceSolution> {
    if model.lambda() <= 0.0 {
        return Err(Error::InvalidParam(
            "reference Newton needs lambda > 0 for strong convexity".into(),
        ));
    }
    let mut scratch = OracleCounter::new();
    let ls = LineSearchParams::default();
    let all: Vec<usize> = (0..model.n()).collect();
    let max_cg = 3 * model.d() + 10;

    let mut w = w0.to_vec();
    let mut f_w = model.value(&w, &mut scratch)?;
    for k in 0..REFERENCE_MAX_OUTER {
        let g = model.gradient(&w, &mut scratch)?;
        let gnorm = nrm2(&g);
        if gnorm <= tol {
            return Ok(ReferenceSolution {
                w_star: w,
                f_star: f_w,
                grad_norm: gnorm,
                iters: k,
            });
        }
        let b: Vec<f64> = g.iter().map(|&v| -v).collect();
        let res = cg(
            |v| model.hess_vec(&w, v, &all, &mut scratch),
            &b,
            max_cg,
            1e-14,
        )?;
        let slope = dot(&g, &res.solution);
        if slope.abs() <= 1e-14 * f_w.abs().max(1.0) {
            // The decrease is below the f64 resolution of F, so the
            // sufficient-decrease test is pure noise; in this regime the
            // unit Newton step is a contraction and drives the gradient
            // to its floating-point floor.
            axpy(1.0, &res.solution, &mut w);
            f_w = model.value(&w, &mut scratch)?;
        } else {
            let ar = armijo(model, &w, &res.solution, &g, f_w, &ls, &mut scratch)?;
            axpy(ar.alpha, &res.solution, &mut w);
            f_w = ar.f_new;
        }
        if !f_w.is_finite() || !finite(&w) {
            return Err(Error::NonFinite("reference Newton iterate"));
        }
    }
    Err(Error::NoConvergence(format!(
        "reference Newton exceeded {REFERENCE_MAX_OUTER} iterations"
    )))
}

/// Convenience: reference solve from the zero vector at tolerance 1e-12.
pub fn reference_f_star(model: &LogisticModel) -> Result<ReferenceSolution> {
    run_reference_newton(model, &vec![0.0; model.d()], 1e-12)
}
