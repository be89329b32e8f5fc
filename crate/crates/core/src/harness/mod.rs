//! Experiment harness: the per-iteration budget protocol, grid execution
//! over method hyper-parameters, trace persistence, and plots.
//!
//! Every method gets the same per-iteration budget `b` (total component
//! work between full gradient evaluations) and a small ladder of
//! hyper-parameter combinations that respect it exactly: SSN-CG pairs
//! satisfy `t * max_cg = b`, Newton-Sketch pairs `2 m_ns * max_cg = b`,
//! SSN-SGI sets `m_sgi = b`, and SVRG `m_svrg = b/2`. Grid cells run in
//! a worker pool with per-cell derived seeds; aggregation is ordered by
//! cell key, so reports are pure functions of the `ExperimentSpec` apart from wall
//! time.

mod plot;

pub use plot::{emit_plots, PlotSeries};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{read_libsvm, split, synth_gen, Dataset};
use crate::error::{Error, Result};
use crate::methods::{reference_f_star, run_method, MethodConfig, MethodVariant, TraceRow};
use crate::par;
use crate::problem::LogisticModel;
use crate::rng::derive_seed;

/// CG residual tolerance used throughout grid mode, keeping each method's
/// grid two-dimensional.
pub const GRID_ZETA: f64 = 1e-2;

/// Budget fractions tried for the subsample size / sketch rows.
pub const FRACTION_LADDER: [usize; 6] = [1, 2, 5, 10, 25, 50];

/// Step-length sweep for the first-order inner loops: `2^-12 ..= 2^0`.
pub fn step_length_grid() -> Vec<f64> {
    (-12..=0).map(|e| 2f64.powi(e)).collect()
}

/// The nine per-iteration budget levels
/// `{n/100, n/50, n/10, n/5, n/2, n, 2n, 5n, 10n}`, rounded to the
/// nearest integer with a floor of 1.
pub fn budget_grid(n: usize) -> Vec<usize> {
    let n = n as f64;
    [
        n / 100.0,
        n / 50.0,
        n / 10.0,
        n / 5.0,
        n / 2.0,
        n,
        2.0 * n,
        5.0 * n,
        10.0 * n,
    ]
    .iter()
    .map(|&b| (b.round() as usize).max(1))
    .collect()
}

/// Method families the grid can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    SsnCg,
    NewtonSketch,
    SsnSgi,
    Svrg,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::SsnCg,
        MethodKind::NewtonSketch,
        MethodKind::SsnSgi,
        MethodKind::Svrg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::SsnCg => "ssn-cg",
            MethodKind::NewtonSketch => "newton-sketch",
            MethodKind::SsnSgi => "ssn-sgi",
            MethodKind::Svrg => "svrg",
        }
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssn-cg" => Ok(MethodKind::SsnCg),
            "newton-sketch" => Ok(MethodKind::NewtonSketch),
            "ssn-sgi" => Ok(MethodKind::SsnSgi),
            "svrg" => Ok(MethodKind::Svrg),
            other => Err(Error::InvalidParam(format!("unknown method {other:?}"))),
        }
    }
}

/// All hyper-parameter combinations for one method at budget `b`.
/// May be empty for tiny budgets (the caller records the skip).
/// Subsample sizes above `n` are dropped since sampling is without
/// replacement.
pub fn resolve_hypers(kind: MethodKind, b: usize, n: usize) -> Vec<MethodVariant> {
    let alphas = step_length_grid();
    match kind {
        MethodKind::SsnCg => {
            let mut out = Vec::new();
            for f in FRACTION_LADDER {
                if b.is_multiple_of(f) {
                    let t = b / f;
                    if t >= 1 && t <= n {
                        out.push(MethodVariant::SsnCg {
                            t,
                            max_cg: f,
                            zeta: GRID_ZETA,
                        });
                    }
                }
            }
            out
        }
        MethodKind::NewtonSketch => {
            let mut out = Vec::new();
            for f in FRACTION_LADDER {
                if b.is_multiple_of(2 * f) {
                    let m_ns = b / (2 * f);
                    if m_ns >= 1 {
                        out.push(MethodVariant::NewtonSketch {
                            m_ns,
                            max_cg: f,
                            zeta: GRID_ZETA,
                        });
                    }
                }
            }
            out
        }
        MethodKind::SsnSgi => alphas
            .iter()
            .map(|&a| MethodVariant::SsnSgi {
                m_sgi: b,
                alpha_inner: a,
            })
            .collect(),
        MethodKind::Svrg => {
            let m_svrg = b / 2;
            if m_svrg == 0 {
                return Vec::new();
            }
            alphas
                .iter()
                .map(|&a| MethodVariant::Svrg { alpha: a, m_svrg })
                .collect()
        }
    }
}

/// Dataset source for an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DatasetRef {
    Path {
        path: String,
    },
    Synth {
        n: usize,
        d: usize,
        kappa: f64,
        seed: u64,
    },
}

impl DatasetRef {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetRef::Path { path } => read_libsvm(path),
            DatasetRef::Synth { n, d, kappa, seed } => synth_gen(*n, *d, *kappa, *seed),
        }
    }
}

fn default_replications() -> usize {
    1
}

fn default_test_frac() -> f64 {
    0.1
}

fn default_max_outer() -> usize {
    200
}

fn default_grad_tol() -> f64 {
    1e-8
}

/// Grid experiment description; serializable as the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: DatasetRef,
    pub methods: Vec<MethodKind>,
    /// Budget levels; `None` means the standard nine-level grid.
    #[serde(default)]
    pub budgets: Option<Vec<usize>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    pub out_dir: String,
    /// Regularizer; `None` means `1/n`.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_test_frac")]
    pub test_frac: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
}

/// Summary of one grid cell (a method variant at a budget).
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub method: String,
    pub budget: usize,
    pub params: String,
    pub status: String,
    pub final_error: f64,
    pub ege_to_1e4: Option<f64>,
    pub ege_to_1e8: Option<f64>,
    pub best: bool,
}

/// Grid outcome: every cell plus the best cell per method.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub dataset: String,
    pub n_train: usize,
    pub d: usize,
    pub f_star: f64,
    pub budgets: Vec<usize>,
    /// Budget fractions tried for subsample sizes and sketch rows.
    pub fraction_ladder: Vec<usize>,
    /// Step lengths swept for the first-order inner loops.
    pub step_lengths: Vec<f64>,
    pub cells: Vec<CellSummary>,
    /// method name -> index into `cells`
    pub best: BTreeMap<String, usize>,
}

impl GridReport {
    pub fn best_cell(&self, method: MethodKind) -> Option<&CellSummary> {
        self.best.get(method.name()).map(|&i| &self.cells[i])
    }
}

struct CellOutcome {
    summary: CellSummary,
    traces: Vec<(String, Vec<TraceRow>)>,
}

/// Runs the full grid: resolves budgets and hyper-parameters, executes
/// every cell (worker pool, derived seeds), persists per-cell traces,
/// and selects the best cell per method by smallest EGE to reach
/// training error 1e-8 (falling back to best final error). Cell failures
/// are recorded, never fatal.
pub fn run_grid(spec: &ExperimentSpec) -> Result<GridReport> {
    if spec.methods.is_empty() {
        return Err(Error::InvalidParam("no methods requested".into()));
    }
    if spec.replications == 0 {
        return Err(Error::InvalidParam("replications must be >= 1".into()));
    }
    let full = spec.dataset.load()?;
    let parts = split(&full, spec.test_frac, derive_seed(spec.seed, "grid/split"))?;
    let test = parts.test;
    let lambda = spec.lambda.unwrap_or(1.0 / parts.train.n() as f64);
    let name = parts.train.name.clone();
    let model = LogisticModel::new(parts.train, lambda)?;
    let n = model.n();
    let d = model.d();

    let reference = reference_f_star(&model)?;
    let f_star = reference.f_star;

    let budgets = spec.budgets.clone().unwrap_or_else(|| budget_grid(n));

    // enumerate cells up front so execution order never matters
    let mut cells: Vec<(MethodKind, usize, MethodVariant)> = Vec::new();
    for &kind in &spec.methods {
        for &b in &budgets {
            for variant in resolve_hypers(kind, b, n) {
                cells.push((kind, b, variant));
            }
        }
    }

    let out_dir = PathBuf::from(&spec.out_dir);
    let cells_dir = out_dir.join("cells");
    fs::create_dir_all(&cells_dir)?;

    let outcomes: Vec<CellOutcome> = par::map_indexed(cells.len(), |idx| {
        let (kind, b, variant) = &cells[idx];
        run_cell(&model, &test, spec, *kind, *b, variant, f_star)
    });

    // persist traces and build the report in cell order
    let mut summaries = Vec::with_capacity(outcomes.len());
    let mut best: BTreeMap<String, usize> = BTreeMap::new();
    let mut best_traces: BTreeMap<String, Vec<TraceRow>> = BTreeMap::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        for (file_stem, rows) in &outcome.traces {
            write_trace_csv(rows, cells_dir.join(format!("{file_stem}.csv")))?;
        }
        let s = outcome.summary;
        let method = s.method.clone();
        let better = match best.get(&method) {
            None => true,
            Some(&j) => cell_is_better(&s, &summaries[j]),
        };
        if better {
            best.insert(method.clone(), i);
            if let Some((_, rows)) = outcome.traces.first() {
                best_traces.insert(method, rows.clone());
            }
        }
        summaries.push(s);
    }
    for &i in best.values() {
        summaries[i].best = true;
    }

    let best_dir = out_dir.join("best");
    fs::create_dir_all(&best_dir)?;
    for (method, rows) in &best_traces {
        write_trace_csv(rows, best_dir.join(format!("{method}.csv")))?;
    }

    let report = GridReport {
        dataset: name,
        n_train: n,
        d,
        f_star,
        budgets,
        fraction_ladder: FRACTION_LADDER.to_vec(),
        step_lengths: step_length_grid(),
        cells: summaries,
        best,
    };

    write_summary_csv(&report, out_dir.join("summary.csv"))?;
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(out_dir.join("report.json"), json)?;
    Ok(report)
}

fn cell_is_better(a: &CellSummary, b: &CellSummary) -> bool {
    match (a.ege_to_1e8, b.ege_to_1e8) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => a.final_error < b.final_error,
    }
}

fn run_cell(
    model: &LogisticModel,
    test: &Dataset,
    spec: &ExperimentSpec,
    kind: MethodKind,
    budget: usize,
    variant: &MethodVariant,
    f_star: f64,
) -> CellOutcome {
    let label = variant.param_label();
    let key = format!("{}_b{}_{}", kind.name(), budget, label);
    let w0 = vec![0.0; model.d()];

    let mut traces = Vec::new();
    let mut statuses = Vec::new();
    let mut finals = Vec::new();
    let mut to_1e4 = Vec::new();
    let mut to_1e8 = Vec::new();
    for rep in 0..spec.replications {
        let cfg = MethodConfig {
            variant: variant.clone(),
            max_outer: spec.max_outer,
            grad_tol: spec.grad_tol,
            seed: derive_seed(spec.seed, &format!("cell/{key}/rep{rep}")),
            line_search: Default::default(),
        };
        match run_method(model, Some(test), &w0, &cfg, f_star) {
            Ok(trace) => {
                statuses.push(trace.status.to_string());
                finals.push(trace.final_error());
                to_1e4.push(trace.ege_to(1e-4));
                to_1e8.push(trace.ege_to(1e-8));
                traces.push((format!("{key}_rep{rep}"), trace.rows));
            }
            Err(e) => {
                statuses.push(format!("error: {e}"));
                finals.push(f64::INFINITY);
                to_1e4.push(None);
                to_1e8.push(None);
            }
        }
    }

    let summary = CellSummary {
        method: kind.name().to_string(),
        budget,
        params: label,
        status: dedup_statuses(&statuses),
        final_error: median(&mut finals.clone()),
        ege_to_1e4: median_reached(&to_1e4),
        ege_to_1e8: median_reached(&to_1e8),
        best: false,
    };
    CellOutcome { summary, traces }
}

fn dedup_statuses(statuses: &[String]) -> String {
    let mut uniq: Vec<&str> = Vec::new();
    for s in statuses {
        if !uniq.contains(&s.as_str()) {
            uniq.push(s);
        }
    }
    uniq.join("|")
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::INFINITY;
    }
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

/// Median EGE over replications that reached the threshold, provided at
/// least half of them did.
fn median_reached(values: &[Option<f64>]) -> Option<f64> {
    let mut reached: Vec<f64> = values.iter().flatten().copied().collect();
    if reached.is_empty() || reached.len() * 2 < values.len() {
        return None;
    }
    Some(median(&mut reached))
}

/// Writes a trace as CSV with the fixed column set.
pub fn write_trace_csv(rows: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "iter,cum_ege,train_error,test_loss,step_len,inner_iters,wall_ms"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.iter, r.cum_ege, r.train_error, r.test_loss, r.step_len, r.inner_iters, r.wall_ms
        )?;
    }
    Ok(())
}

/// Reads back a trace CSV written by [`write_trace_csv`].
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let pstr = path.display().to_string();
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                path: pstr.clone(),
                line: k + 1,
                msg: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let err = |msg: String| Error::Parse {
            path: pstr.clone(),
            line: k + 1,
            msg,
        };
        rows.push(TraceRow {
            iter: fields[0].parse().map_err(|e| err(format!("iter: {e}")))?,
            cum_ege: fields[1]
                .parse()
                .map_err(|e| err(format!("cum_ege: {e}")))?,
            train_error: fields[2]
                .parse()
                .map_err(|e| err(format!("train_error: {e}")))?,
            test_loss: fields[3]
                .parse()
                .map_err(|e| err(format!("test_loss: {e}")))?,
            step_len: fields[4]
                .parse()
                .map_err(|e| err(format!("step_len: {e}")))?,
            inner_iters: fields[5]
                .parse()
                .map_err(|e| err(format!("inner_iters: {e}")))?,
            wall_ms: fields[6]
                .parse()
                .map_err(|e| err(format!("wall_ms: {e}")))?,
        });
    }
    Ok(rows)
}

fn write_summary_csv(report: &GridReport, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "method,budget,params,status,final_error,ege_to_1e4,ege_to_1e8,best"
    )?;
    for c in &report.cells {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            c.method,
            c.budget,
            c.params,
            c.status,
            c.final_error,
            c.ege_to_1e4.map_or(String::new(), |v| v.to_string()),
            c.ege_to_1e8.map_or(String::new(), |v| v.to_string()),
            c.best
        )?;
    }
    Ok(())
}
