//! The l2-regularized logistic-regression objective and its oracles.
//!
//! For labels `y_i` in `{-1,+1}` the objective is
//!
//! ```text
//! F(w) = (1/n) sum_i log(1 + exp(-y_i <w, x_i>)) + (lambda/2) ||w||^2
//! ```
//!
//! viewed as the average of components `F_i(w) = loss_i(w) + (lambda/2)||w||^2`,
//! so every component Hessian is `d_i x_i x_i^T + lambda I` with
//! `d_i = sigma(t_i)(1 - sigma(t_i))` and the square root of the
//! unregularized Hessian is `(1/sqrt(n)) D^{1/2} X`.
//!
//! Work accounting follows a unit cost per component function, gradient,
//! or Hessian-vector evaluation; one *effective gradient evaluation* is
//! `n` units. Oracles are read-only and safe to call concurrently; the
//! [`OracleCounter`] is the only mutable piece and is owned by one run.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linops::{axpy, dot, CscMatrix, Matrix};
use crate::par;

const WEIGHT_FLOOR: f64 = 1e-300;

/// Tallies of component-level oracle calls, in units where one component
/// function/gradient/Hessian-vector evaluation costs 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounter {
    pub component_fn_evals: u64,
    pub component_grads: u64,
    pub component_hvs: u64,
}

impl OracleCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn units(&self) -> u64 {
        self.component_fn_evals + self.component_grads + self.component_hvs
    }

    /// Effective gradient evaluations: total units over `n`.
    pub fn ege(&self, n: usize) -> f64 {
        self.units() as f64 / n as f64
    }
}

/// The finite-sum logistic objective over a dataset.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    data: Dataset,
    lambda: f64,
    /// Column view of sparse features, built once so per-column access
    /// (sketch construction) avoids scanning every row.
    csc: Option<CscMatrix>,
}

impl LogisticModel {
    pub fn new(data: Dataset, lambda: f64) -> Result<Self> {
        if data.n() == 0 || data.d() == 0 {
            return Err(Error::InvalidParam("empty dataset".into()));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParam(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let csc = match &data.features {
            Matrix::Csr(m) => Some(m.to_csc()),
            Matrix::Dense(_) => None,
        };
        Ok(Self { data, lambda, csc })
    }

    /// Model with the conventional regularizer `lambda = 1/n`.
    pub fn with_default_lambda(data: Dataset) -> Result<Self> {
        let lambda = 1.0 / data.n() as f64;
        Self::new(data, lambda)
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn d(&self) -> usize {
        self.data.d()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub(crate) fn csc(&self) -> Option<&CscMatrix> {
        self.csc.as_ref()
    }

    fn check_dim(&self, w: &[f64], op: &'static str) -> Result<()> {
        if w.len() != self.d() {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.d(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Margins `y_i <w, x_i>` for all rows.
    fn margins(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut t = self.data.features.matvec(w)?;
        for (ti, &y) in t.iter_mut().zip(&self.data.labels) {
            *ti *= f64::from(y);
        }
        Ok(t)
    }

    /// Objective value; charges `n` component function evaluations.
    pub fn value(&self, w: &[f64], counter: &mut OracleCounter) -> Result<f64> {
        self.check_dim(w, "value")?;
        let t = self.margins(w)?;
        let partials = par::map_chunks(self.n(), |r| {
            r.map(|i| stable_log1p_exp_neg(t[i])).collect::<Vec<f64>>()
        });
        let mut sum = 0.0;
        for p in partials {
            sum += p.iter().sum::<f64>();
        }
        counter.component_fn_evals += self.n() as u64;
        Ok(sum / self.n() as f64 + 0.5 * self.lambda * dot(w, w))
    }

    /// Full gradient; charges `n` component gradient evaluations.
    pub fn gradient(&self, w: &[f64], counter: &mut OracleCounter) -> Result<Vec<f64>> {
        self.check_dim(w, "gradient")?;
        let t = self.margins(w)?;
        let coeffs: Vec<f64> = t
            .iter()
            .zip(&self.data.labels)
            .map(|(&ti, &y)| -sigma(-ti) * f64::from(y))
            .collect();
        let mut g = self.data.features.matvec_t(&coeffs)?;
        let inv_n = 1.0 / self.n() as f64;
        for (gj, &wj) in g.iter_mut().zip(w) {
            *gj = *gj * inv_n + self.lambda * wj;
        }
        counter.component_grads += self.n() as u64;
        Ok(g)
    }

    /// Gradient of one component `F_i`; charges 1 unit.
    pub fn grad_component(
        &self,
        w: &[f64],
        i: usize,
        counter: &mut OracleCounter,
    ) -> Result<Vec<f64>> {
        self.check_dim(w, "grad_component")?;
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                what: "component",
                index: i,
                len: self.n(),
            });
        }
        let y = self.data.label(i);
        let t = y * self.data.features.row_dot(i, w);
        let c = -sigma(-t) * y;
        let mut g: Vec<f64> = w.iter().map(|&wj| self.lambda * wj).collect();
        self.data.features.row_axpy(i, c, &mut g);
        counter.component_grads += 1;
        Ok(g)
    }

    /// GLM curvature weights `sigma(t_i)(1 - sigma(t_i))`, `t_i = <w, x_i>`,
    /// for the given rows. Entries lie in `(0, 1/4]`.
    pub fn diag_weights(&self, w: &[f64], subset: &[usize]) -> Result<Vec<f64>> {
        self.check_dim(w, "diag_weights")?;
        for &i in subset {
            if i >= self.n() {
                return Err(Error::IndexOutOfRange {
                    what: "subset row",
                    index: i,
                    len: self.n(),
                });
            }
        }
        Ok(subset
            .iter()
            .map(|&i| curvature_weight(self.data.features.row_dot(i, w)))
            .collect())
    }

    /// Subsampled Hessian-vector product
    /// `(1/|subset|) sum_{i in subset} d_i <x_i, v> x_i + lambda v`;
    /// charges `|subset|` component Hessian-vector units. The full index
    /// set gives the true Hessian-vector product.
    pub fn hess_vec(
        &self,
        w: &[f64],
        v: &[f64],
        subset: &[usize],
        counter: &mut OracleCounter,
    ) -> Result<Vec<f64>> {
        self.check_dim(w, "hess_vec(w)")?;
        self.check_dim(v, "hess_vec(v)")?;
        if subset.is_empty() {
            return Err(Error::InvalidParam("hess_vec: empty subset".into()));
        }
        for &i in subset {
            if i >= self.n() {
                return Err(Error::IndexOutOfRange {
                    what: "subset row",
                    index: i,
                    len: self.n(),
                });
            }
        }
        let d = self.d();
        let feats = &self.data.features;
        let partials = par::map_chunks(subset.len(), |r| {
            let mut acc = vec![0.0; d];
            for k in r {
                let i = subset[k];
                let di = curvature_weight(feats.row_dot(i, w));
                let ui = feats.row_dot(i, v);
                feats.row_axpy(i, di * ui, &mut acc);
            }
            acc
        });
        let mut out = vec![0.0; d];
        for p in partials {
            axpy(1.0, &p, &mut out);
        }
        let inv = 1.0 / subset.len() as f64;
        for (oj, &vj) in out.iter_mut().zip(v) {
            *oj = *oj * inv + self.lambda * vj;
        }
        counter.component_hvs += subset.len() as u64;
        Ok(out)
    }

    /// Forward square-root Hessian application
    /// `(1/sqrt(n)) D^{1/2} X u` (length `n`). Uncounted: callers charge
    /// the enclosing sketched product instead.
    pub fn sqrt_hess_apply(&self, w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w, "sqrt_hess_apply(w)")?;
        self.check_dim(u, "sqrt_hess_apply(u)")?;
        let tw = self.data.features.matvec(w)?;
        let mut xu = self.data.features.matvec(u)?;
        let inv_sqrt_n = 1.0 / (self.n() as f64).sqrt();
        for (o, &t) in xu.iter_mut().zip(&tw) {
            *o *= curvature_weight(t).sqrt() * inv_sqrt_n;
        }
        Ok(xu)
    }

    /// Transpose square-root application `(1/sqrt(n)) X^T D^{1/2} z`
    /// (length `d`).
    pub fn sqrt_hess_apply_t(&self, w: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w, "sqrt_hess_apply_t(w)")?;
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch {
                op: "sqrt_hess_apply_t(z)",
                expected: self.n(),
                got: z.len(),
            });
        }
        let tw = self.data.features.matvec(w)?;
        let inv_sqrt_n = 1.0 / (self.n() as f64).sqrt();
        let weighted: Vec<f64> = z
            .iter()
            .zip(&tw)
            .map(|(&zi, &t)| zi * curvature_weight(t).sqrt() * inv_sqrt_n)
            .collect();
        self.data.features.matvec_t(&weighted)
    }

    /// Square-root scale for each row at `w`: `sqrt(d_i) / sqrt(n)`.
    /// Used by sketch construction to weight feature columns.
    pub(crate) fn sqrt_row_scales(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w, "sqrt_row_scales")?;
        let tw = self.data.features.matvec(w)?;
        let inv_sqrt_n = 1.0 / (self.n() as f64).sqrt();
        Ok(tw
            .iter()
            .map(|&t| curvature_weight(t).sqrt() * inv_sqrt_n)
            .collect())
    }
}

/// Mean unregularized logistic loss of `w` on a dataset. Instrumentation
/// only; charges nothing.
pub fn mean_logistic_loss(ds: &Dataset, w: &[f64]) -> Result<f64> {
    if w.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            op: "mean_logistic_loss",
            expected: ds.d(),
            got: w.len(),
        });
    }
    let t = ds.features.matvec(w)?;
    let sum: f64 = t
        .iter()
        .zip(&ds.labels)
        .map(|(&ti, &y)| stable_log1p_exp_neg(f64::from(y) * ti))
        .sum();
    Ok(sum / ds.n() as f64)
}

/// `log(1 + exp(-t))` without overflow for large `|t|`.
#[inline]
fn stable_log1p_exp_neg(t: f64) -> f64 {
    (-t.abs()).exp().ln_1p() + (-t).max(0.0)
}

/// Logistic function `1 / (1 + exp(-t))`, evaluated stably.
#[inline]
fn sigma(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `sigma(t) (1 - sigma(t))`, floored to avoid denormal stalls.
#[inline]
fn curvature_weight(t: f64) -> f64 {
    let a = (-t.abs()).exp();
    let w = a / ((1.0 + a) * (1.0 + a));
    w.max(WEIGHT_FLOOR)
}
