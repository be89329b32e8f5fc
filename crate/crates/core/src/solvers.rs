//! Inner linear-system solvers.
//!
//! [`cg`] is a matrix-free conjugate gradient with the relative-residual
//! stopping test `||A p + g|| < zeta ||g||`; [`sgi`] is the stochastic
//! gradient iteration on the quadratic model, drawing one component
//! Hessian per step.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linops::{axpy, dot, nrm2};
use crate::problem::{LogisticModel, OracleCounter};
use crate::rng::SplitMix64;

/// Breakdown guard: the subsampled operators are positive definite by
/// construction, so a vanishing curvature along the search direction
/// signals caller error; we stop rather than divide by it.
const CURVATURE_GUARD: f64 = 1e-16;

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgResult {
    pub solution: Vec<f64>,
    pub iters_used: usize,
    /// `||r||` per iteration, including the initial residual `||b||`.
    pub residual_norms: Vec<f64>,
    pub converged: bool,
}

/// Conjugate gradient on `A x = b` from the zero start, for a symmetric
/// positive definite operator given as a closure.
///
/// Stops at the first iterate with `||r|| <= zeta ||b||`, after
/// `max_iters` iterations, or on the curvature breakdown guard (returned
/// unconverged). Non-finite arithmetic is reported as an error since it
/// signals an indefinite or ill-posed operator.
pub fn cg<F>(mut apply_a: F, b: &[f64], max_iters: usize, zeta: f64) -> Result<CgResult>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidParam(format!("zeta {zeta} outside (0,1)")));
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("cg rhs"));
    }
    let n = b.len();
    let b_norm = nrm2(b);
    let mut residual_norms = vec![b_norm];
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgResult {
            solution: x,
            iters_used: 0,
            residual_norms,
            converged: true,
        });
    }
    let threshold = zeta * b_norm;

    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut rs = dot(&r, &r);
    let mut converged = false;
    let mut iters = 0;

    while iters < max_iters {
        let ap = apply_a(&p)?;
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NonFinite("cg curvature"));
        }
        if pap <= CURVATURE_GUARD * dot(&p, &p) {
            break;
        }
        let alpha = rs / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rs_new = dot(&r, &r);
        if !rs_new.is_finite() {
            return Err(Error::NonFinite("cg residual"));
        }
        iters += 1;
        let r_norm = rs_new.sqrt();
        residual_norms.push(r_norm);
        if r_norm <= threshold {
            converged = true;
            break;
        }
        let beta = rs_new / rs;
        for (pj, &rj) in p.iter_mut().zip(&r) {
            *pj = rj + beta * *pj;
        }
        rs = rs_new;
    }

    Ok(CgResult {
        solution: x,
        iters_used: iters,
        residual_norms,
        converged,
    })
}

/// Stochastic gradient iteration on the quadratic model at `w`:
/// `p <- p - alpha (H_i p + g)` with a fresh uniform component `i` per
/// step and `p^0 = -g`. Charges one component Hessian-vector unit per
/// step. A non-finite iterate is reported as an error (step size too
/// large; callers treat it as divergence).
pub fn sgi(
    model: &LogisticModel,
    w: &[f64],
    g: &[f64],
    m_sgi: usize,
    alpha: f64,
    seed: u64,
    counter: &mut OracleCounter,
) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParam(format!(
            "sgi alpha {alpha} must be > 0"
        )));
    }
    let n = model.n();
    let mut rng = SplitMix64::new(seed);
    let mut p: Vec<f64> = g.iter().map(|&v| -v).collect();
    for _ in 0..m_sgi {
        let i = rng.random_range(0..n);
        let hp = model.hess_vec(w, &p, &[i], counter)?;
        for j in 0..p.len() {
            p[j] -= alpha * (hp[j] + g[j]);
        }
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sgi iterate"));
        }
    }
    Ok(p)
}
