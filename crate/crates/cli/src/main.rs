//! Experiment CLI for the hesslab optimizers.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hesslab::analysis::spectrum_report;
use hesslab::data::{read_libsvm, split, synth_gen, write_libsvm, Dataset};
use hesslab::harness::{
    emit_plots, read_trace_csv, run_grid, write_trace_csv, DatasetRef, ExperimentSpec, MethodKind,
};
use hesslab::methods::{run_method, run_reference_newton, MethodConfig, MethodVariant};
use hesslab::problem::LogisticModel;

#[derive(Parser)]
#[command(
    name = "hesslab",
    version,
    about = "Subsampled Newton, Newton-Sketch, and SVRG experiments on regularized logistic regression"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset (libsvm format) with a target
    /// condition number.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve to high accuracy and write the reference optimum as JSON.
    Fstar {
        #[arg(long)]
        data: PathBuf,
        /// Regularizer (default 1/n).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one optimizer and write its trace CSV.
    Run {
        #[arg(long)]
        data: PathBuf,
        /// ssn-cg | newton-sketch | ssn-sgi | svrg
        #[arg(long)]
        method: String,
        /// Subsample size (ssn-cg).
        #[arg(long)]
        t: Option<usize>,
        /// CG iteration cap (ssn-cg, newton-sketch).
        #[arg(long)]
        max_cg: Option<usize>,
        /// CG residual tolerance.
        #[arg(long, default_value_t = 1e-2)]
        zeta: f64,
        /// Sketch rows (newton-sketch).
        #[arg(long)]
        m_ns: Option<usize>,
        /// Inner iteration count (ssn-sgi).
        #[arg(long)]
        m_sgi: Option<usize>,
        /// Step length (ssn-sgi inner loop, svrg).
        #[arg(long)]
        alpha: Option<f64>,
        /// Cycle length (svrg).
        #[arg(long)]
        m_svrg: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 100)]
        max_outer: usize,
        #[arg(long, default_value_t = 1e-8)]
        grad_tol: f64,
        /// Held-out fraction for the test-loss column (0 disables).
        #[arg(long, default_value_t = 0.1)]
        test_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep per-iteration budgets and hyper-parameters for several
    /// methods; write per-cell traces, a summary table, and best-cell
    /// traces.
    Grid {
        /// JSON experiment spec; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Comma-separated subset of ssn-cg,newton-sketch,ssn-sgi,svrg.
        #[arg(long)]
        methods: Option<String>,
        /// Comma-separated budget levels (default: the nine-level grid).
        #[arg(long)]
        budgets: Option<String>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        test_frac: Option<f64>,
        #[arg(long)]
        max_outer: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue spectra of true vs subsampled vs sketched Hessians at
    /// the optimum, written as CSV.
    Spectrum {
        #[arg(long)]
        data: PathBuf,
        /// Subsample size as a fraction of n.
        #[arg(long)]
        t_frac: f64,
        /// Sketch rows.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG charts from a directory of trace CSVs (one polyline
    /// per file).
    Plot {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen {
            n,
            d,
            kappa,
            seed,
            out,
        } => {
            let ds = synth_gen(n, d, kappa, seed)?;
            write_libsvm(&ds, &out)?;
            println!("wrote {} ({} x {})", out.display(), ds.n(), ds.d());
        }
        Cmd::Fstar { data, lambda, out } => {
            let ds = read_libsvm(&data)?;
            let model = build_model(ds, lambda)?;
            let sol = run_reference_newton(&model, &vec![0.0; model.d()], 1e-12)?;
            let json = serde_json::json!({
                "f_star": sol.f_star,
                "grad_norm": sol.grad_norm,
                "iters": sol.iters,
                "lambda": model.lambda(),
                "n": model.n(),
                "d": model.d(),
                "w_star": sol.w_star,
            });
            fs::write(&out, serde_json::to_string_pretty(&json)?)?;
            println!(
                "f_star = {:.12e} ({} Newton iterations)",
                sol.f_star, sol.iters
            );
        }
        Cmd::Run {
            data,
            method,
            t,
            max_cg,
            zeta,
            m_ns,
            m_sgi,
            alpha,
            m_svrg,
            lambda,
            max_outer,
            grad_tol,
            test_frac,
            seed,
            out,
        } => {
            let full = read_libsvm(&data)?;
            let (train, test) = split_opt(full, test_frac, seed)?;
            let model = build_model(train, lambda)?;
            let variant = assemble_variant(&method, t, max_cg, zeta, m_ns, m_sgi, alpha, m_svrg)?;
            let cfg = MethodConfig::new(variant, max_outer, grad_tol, seed);
            let f_star = run_reference_newton(&model, &vec![0.0; model.d()], 1e-12)?.f_star;
            let trace = run_method(&model, test.as_ref(), &vec![0.0; model.d()], &cfg, f_star)?;
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{}.csv", trace.method));
            write_trace_csv(&trace.rows, &path)?;
            let last = trace.rows.last().context("empty trace")?;
            println!(
                "{}: status {} after {} iterations, train error {:.3e}, {:.2} EGE -> {}",
                trace.method,
                trace.status,
                last.iter,
                last.train_error,
                last.cum_ege,
                path.display()
            );
        }
        Cmd::Grid {
            config,
            data,
            methods,
            budgets,
            replications,
            lambda,
            test_frac,
            max_outer,
            seed,
            out,
        } => {
            let mut spec: ExperimentSpec = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text)?
                }
                None => ExperimentSpec {
                    dataset: DatasetRef::Path {
                        path: String::new(),
                    },
                    methods: MethodKind::ALL.to_vec(),
                    budgets: None,
                    replications: 1,
                    seed: 0,
                    out_dir: "grid-out".into(),
                    lambda: None,
                    test_frac: 0.1,
                    max_outer: 200,
                    grad_tol: 1e-8,
                },
            };
            if let Some(d) = data {
                spec.dataset = DatasetRef::Path {
                    path: d.display().to_string(),
                };
            }
            if let Some(m) = methods {
                spec.methods = m
                    .split(',')
                    .map(|s| s.trim().parse::<MethodKind>().map_err(Into::into))
                    .collect::<Result<Vec<_>>>()?;
            }
            if let Some(b) = budgets {
                spec.budgets = Some(
                    b.split(',')
                        .map(|s| s.trim().parse::<usize>().context("bad budget"))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            if let Some(r) = replications {
                spec.replications = r;
            }
            if lambda.is_some() {
                spec.lambda = lambda;
            }
            if let Some(tf) = test_frac {
                spec.test_frac = tf;
            }
            if let Some(mo) = max_outer {
                spec.max_outer = mo;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(o) = out {
                spec.out_dir = o.display().to_string();
            }
            if matches!(&spec.dataset, DatasetRef::Path { path } if path.is_empty()) {
                bail!("no dataset: pass --data or a --config with a dataset entry");
            }

            let report = run_grid(&spec)?;
            println!(
                "{} cells on {} (n={}, d={}), f* = {:.12e}",
                report.cells.len(),
                report.dataset,
                report.n_train,
                report.d,
                report.f_star
            );
            for (method, &idx) in &report.best {
                let c = &report.cells[idx];
                println!(
                    "best {}: b={} {} status {} final {:.3e} ege@1e-8 {}",
                    method,
                    c.budget,
                    c.params,
                    c.status,
                    c.final_error,
                    c.ege_to_1e8.map_or("-".to_string(), |v| format!("{v:.2}")),
                );
            }
            println!("report: {}/report.json", spec.out_dir);
        }
        Cmd::Spectrum {
            data,
            t_frac,
            m,
            reps,
            lambda,
            seed,
            out,
        } => {
            let ds = read_libsvm(&data)?;
            let model = build_model(ds, lambda)?;
            if !(0.0 < t_frac && t_frac <= 1.0) {
                bail!("t_frac must be in (0, 1]");
            }
            let t = ((model.n() as f64 * t_frac).round() as usize).clamp(1, model.n());
            let w_star = run_reference_newton(&model, &vec![0.0; model.d()], 1e-12)?.w_star;
            let report = spectrum_report(&model, &w_star, t, m, reps, seed)?;
            report.write_csv(&out)?;
            println!(
                "spectrum over {} replications (T={}, m={}) -> {}",
                reps,
                t,
                m,
                out.display()
            );
        }
        Cmd::Plot { traces, out } => {
            let mut series = Vec::new();
            let mut entries: Vec<_> = fs::read_dir(&traces)?
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .collect();
            entries.sort();
            for path in entries {
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let rows = read_trace_csv(&path)?;
                series.push((label, rows));
            }
            let files = emit_plots(&series, &out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn build_model(ds: Dataset, lambda: Option<f64>) -> Result<LogisticModel> {
    let lambda = lambda.unwrap_or(1.0 / ds.n() as f64);
    Ok(LogisticModel::new(ds, lambda)?)
}

fn split_opt(full: Dataset, test_frac: f64, seed: u64) -> Result<(Dataset, Option<Dataset>)> {
    if test_frac == 0.0 {
        return Ok((full, None));
    }
    let parts = split(
        &full,
        test_frac,
        hesslab::rng::derive_seed(seed, "cli/split"),
    )?;
    Ok((parts.train, Some(parts.test)))
}

#[allow(clippy::too_many_arguments)]
fn assemble_variant(
    method: &str,
    t: Option<usize>,
    max_cg: Option<usize>,
    zeta: f64,
    m_ns: Option<usize>,
    m_sgi: Option<usize>,
    alpha: Option<f64>,
    m_svrg: Option<usize>,
) -> Result<MethodVariant> {
    Ok(match method {
        "ssn-cg" => MethodVariant::SsnCg {
            t: t.context("ssn-cg needs --t")?,
            max_cg: max_cg.context("ssn-cg needs --max-cg")?,
            zeta,
        },
        "newton-sketch" => MethodVariant::NewtonSketch {
            m_ns: m_ns.context("newton-sketch needs --m-ns")?,
            max_cg: max_cg.context("newton-sketch needs --max-cg")?,
            zeta,
        },
        "ssn-sgi" => MethodVariant::SsnSgi {
            m_sgi: m_sgi.context("ssn-sgi needs --m-sgi")?,
            alpha_inner: alpha.context("ssn-sgi needs --alpha")?,
        },
        "svrg" => MethodVariant::Svrg {
            alpha: alpha.context("svrg needs --alpha")?,
            m_svrg: m_svrg.context("svrg needs --m-svrg")?,
        },
        other => bail!("unknown method {other:?} (ssn-cg | newton-sketch | ssn-sgi | svrg)"),
    })
}
