//! Eigenvalue-spectrum reports and convergence-theory calculators.
//!
//! The spectrum report compares, at a fixed iterate, the eigenvalues of
//! the true Hessian against subsampled and sketched Hessians over
//! replications. The calculators evaluate the CG gap factor, the sample
//! size and CG-iteration count that guarantee per-iteration contraction,
//! and order-of-magnitude work complexities (bracketed expressions with
//! unit constants — the hidden constants are not fabricated).

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{dot, nrm2, sym_eig, DenseMatrix};
use crate::par;
use crate::problem::{LogisticModel, OracleCounter};
use crate::rng::{derive_seed, derive_seed_indexed, sample_without_replacement, SplitMix64};
use crate::sketch::{build_sketched_sqrt, RosSketch};

/// Exact eigendecomposition is limited to this dimension; larger
/// problems use matrix-free power iterations.
pub const DENSIFY_GUARD: usize = 2000;

const POWER_ITERS: usize = 5000;
const POWER_TOL: f64 = 1e-10;

/// Uniform spectral bounds and component variance of the Hessians at an
/// iterate, estimated from data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConstants {
    /// Smallest eigenvalue of the full Hessian.
    pub mu_hat: f64,
    /// Largest eigenvalue over sampled component Hessians.
    pub l_hat: f64,
    /// Square root of the spectral norm of the component-Hessian
    /// second moment `(1/n) sum_i (H_i - H)^2`.
    pub sigma_hat: f64,
    pub kappa_hat: f64,
    /// True when `sigma_hat` came from a sampled subset rather than all
    /// components.
    pub sigma_is_estimate: bool,
}

/// Dense Hessian of the model at `w` over the given rows, assembled from
/// Hessian-vector products on basis vectors. Instrumentation only.
pub fn densify_hessian(model: &LogisticModel, w: &[f64], subset: &[usize]) -> Result<DenseMatrix> {
    let d = model.d();
    let mut scratch = OracleCounter::new();
    let mut h = DenseMatrix::zeros(d, d);
    let mut e = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        let col = model.hess_vec(w, &e, subset, &mut scratch)?;
        e[j] = 0.0;
        for i in 0..d {
            h.set(i, j, col[i]);
        }
    }
    // symmetrize away roundoff so the eigensolver accepts it
    for i in 0..d {
        for j in (i + 1)..d {
            let s = 0.5 * (h.get(i, j) + h.get(j, i));
            h.set(i, j, s);
            h.set(j, i, s);
        }
    }
    Ok(h)
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm_sym(a: &DenseMatrix) -> Result<f64> {
    let (eigs, _) = sym_eig(a)?;
    Ok(eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs())))
}

/// Per-index eigenvalue statistics of true, subsampled, and sketched
/// Hessians over replications.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub d: usize,
    pub true_eigs: Vec<f64>,
    pub sub_mean: Vec<f64>,
    pub sub_min: Vec<f64>,
    pub sub_max: Vec<f64>,
    pub sketch_mean: Vec<f64>,
    pub sketch_min: Vec<f64>,
    pub sketch_max: Vec<f64>,
    pub replications: usize,
    pub sample_size: usize,
    pub sketch_rows: usize,
    pub w_used: Vec<f64>,
}

impl SpectrumReport {
    pub fn to_csv_string(&self) -> String {
        let mut s =
            String::from("index,true,sub_mean,sub_min,sub_max,sketch_mean,sketch_min,sketch_max\n");
        for i in 0..self.d {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i,
                self.true_eigs[i],
                self.sub_mean[i],
                self.sub_min[i],
                self.sub_max[i],
                self.sketch_mean[i],
                self.sketch_min[i],
                self.sketch_max[i],
            ));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Eigenvalue spectra of the true Hessian and of `reps` fresh subsampled
/// (size `t_size`) and sketched (`m` rows) Hessians at `w`, aggregated
/// per index as mean/min/max.
pub fn spectrum_report(
    model: &LogisticModel,
    w: &[f64],
    t_size: usize,
    m: usize,
    reps: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    let d = model.d();
    let n = model.n();
    if d > DENSIFY_GUARD {
        return Err(Error::InvalidParam(format!(
            "spectrum_report densifies d x d Hessians; d={d} exceeds guard {DENSIFY_GUARD}"
        )));
    }
    if t_size == 0 || t_size > n {
        return Err(Error::InvalidParam(format!(
            "sample size {t_size} outside [1, n={n}]"
        )));
    }
    if reps == 0 || m == 0 {
        return Err(Error::InvalidParam("need reps >= 1 and m >= 1".into()));
    }

    let all: Vec<usize> = (0..n).collect();
    let (true_eigs, _) = sym_eig(&densify_hessian(model, w, &all)?)?;

    let per_rep: Vec<Result<(Vec<f64>, Vec<f64>)>> = par::map_indexed(reps, |rep| {
        let mut rng = SplitMix64::new(derive_seed_indexed(seed, "spectrum/subset", rep as u64));
        let subset = sample_without_replacement(&mut rng, n, t_size);
        let (sub_eigs, _) = sym_eig(&densify_hessian(model, w, &subset)?)?;

        let sketch_seed = derive_seed_indexed(seed, "spectrum/sketch", rep as u64);
        let sketch = RosSketch::new(n, m, sketch_seed)?;
        let bs = build_sketched_sqrt(model, w, &sketch, rep as u64)?;
        let (sketch_eigs, _) = sym_eig(&bs.densify())?;
        Ok((sub_eigs, sketch_eigs))
    });

    let mut sub_mean = vec![0.0; d];
    let mut sub_min = vec![f64::INFINITY; d];
    let mut sub_max = vec![f64::NEG_INFINITY; d];
    let mut sketch_mean = vec![0.0; d];
    let mut sketch_min = vec![f64::INFINITY; d];
    let mut sketch_max = vec![f64::NEG_INFINITY; d];
    for rep in per_rep {
        let (sub, sk) = rep?;
        for i in 0..d {
            sub_mean[i] += sub[i];
            sub_min[i] = sub_min[i].min(sub[i]);
            sub_max[i] = sub_max[i].max(sub[i]);
            sketch_mean[i] += sk[i];
            sketch_min[i] = sketch_min[i].min(sk[i]);
            sketch_max[i] = sketch_max[i].max(sk[i]);
        }
    }
    for i in 0..d {
        sub_mean[i] /= reps as f64;
        sketch_mean[i] /= reps as f64;
    }

    Ok(SpectrumReport {
        d,
        true_eigs,
        sub_mean,
        sub_min,
        sub_max,
        sketch_mean,
        sketch_min,
        sketch_max,
        replications: reps,
        sample_size: t_size,
        sketch_rows: m,
        w_used: w.to_vec(),
    })
}

/// Squared CG error-reduction factor after `r` iterations on a matrix
/// with the given ascending spectrum:
/// `((lambda_{d-r+1} - lambda_1) / (lambda_{d-r+1} + lambda_1))^2`.
pub fn cg_error_bound(eigs: &[f64], r: usize) -> Result<f64> {
    let d = eigs.len();
    if r == 0 || r > d {
        return Err(Error::IndexOutOfRange {
            what: "cg iteration",
            index: r,
            len: d,
        });
    }
    let lam_top = eigs[d - r];
    let lam_1 = eigs[0];
    let ratio = (lam_top - lam_1) / (lam_top + lam_1);
    Ok(ratio * ratio)
}

/// Subsample size that guarantees the per-iteration contraction:
/// `ceil(64 sigma^2 / mu^2)`.
pub fn contraction_sample_size(c: &ProblemConstants) -> usize {
    (64.0 * c.sigma_hat * c.sigma_hat / (c.mu_hat * c.mu_hat)).ceil() as usize
}

/// Smallest CG iteration count `r` whose spectral gap factor on the
/// subsampled Hessian drops below `1 / (8 kappa^{3/2})`. `r = d` always
/// qualifies (the factor is zero there).
pub fn contraction_cg_iters(eigs_sub: &[f64], kappa: f64) -> usize {
    let d = eigs_sub.len();
    let threshold = 1.0 / (8.0 * kappa.powf(1.5));
    for r in 1..=d {
        let lam_top = eigs_sub[d - r];
        let lam_1 = eigs_sub[0];
        let ratio = (lam_top - lam_1) / (lam_top + lam_1);
        if ratio <= threshold {
            return r;
        }
    }
    d
}

/// Work to reach an `eps`-accurate solution with SSN-CG:
/// `(n + r_bar sigma^2/mu^2) d log(1/eps)` with unit constant.
pub fn work_ssn_cg(n: usize, r_bar: usize, c: &ProblemConstants, d: usize, eps: f64) -> f64 {
    let ratio = c.sigma_hat * c.sigma_hat / (c.mu_hat * c.mu_hat);
    (n as f64 + r_bar as f64 * ratio) * d as f64 * (1.0 / eps).ln()
}

/// Work to reach an `eps`-accurate solution with Newton-Sketch:
/// `(n + kappa^4 d^2) d log(1/eps)` with unit constant.
pub fn work_newton_sketch(n: usize, kappa: f64, d: usize, eps: f64) -> f64 {
    (n as f64 + kappa.powi(4) * (d * d) as f64) * d as f64 * (1.0 / eps).ln()
}

/// Sketch dimension sufficient for linear convergence:
/// `kappa^2 min(n, d)` with unit constant.
pub fn sketch_dimension(kappa: f64, n: usize, d: usize) -> f64 {
    kappa * kappa * n.min(d) as f64
}

/// Estimates `(mu, L, sigma, kappa)` at `w`.
///
/// `mu_hat` is the smallest eigenvalue of the full Hessian (exact
/// eigendecomposition up to the densify guard, shifted power iteration
/// beyond it). `L_hat` maximizes the exact component spectral norm
/// `d_i ||x_i||^2 + lambda` over `probe_count` sampled components.
/// `sigma_hat` uses the exact second-moment matrix when `n d^2` is small
/// enough, otherwise a sampled subset (flagged).
pub fn estimate_constants(
    model: &LogisticModel,
    w: &[f64],
    probe_count: usize,
    seed: u64,
) -> Result<ProblemConstants> {
    if probe_count == 0 {
        return Err(Error::InvalidParam("probe_count must be >= 1".into()));
    }
    let n = model.n();
    let d = model.d();
    let lambda = model.lambda();
    let all: Vec<usize> = (0..n).collect();

    // component spectral norms: lambda_max(d_i x_i x_i^T + lambda I)
    let weights = model.diag_weights(w, &all)?;
    let comp_top = |i: usize| weights[i] * model.data().features.row_norm_sq(i) + lambda;

    let mut rng = SplitMix64::new(derive_seed(seed, "constants/probes"));
    let probes: Vec<usize> = if probe_count >= n {
        all.clone()
    } else {
        sample_without_replacement(&mut rng, n, probe_count)
    };
    let l_hat = probes.iter().map(|&i| comp_top(i)).fold(f64::MIN, f64::max);

    let mu_hat = if d <= DENSIFY_GUARD {
        let h = densify_hessian(model, w, &all)?;
        let (eigs, _) = sym_eig(&h)?;
        eigs[0]
    } else {
        min_eig_power(model, w, &all)?
    };

    const SIGMA_EXACT_LIMIT: f64 = 5e7;
    let (sigma_rows, sigma_is_estimate): (&[usize], bool) =
        if (n as f64) * (d * d) as f64 <= SIGMA_EXACT_LIMIT {
            (&all, false)
        } else {
            (&probes, true)
        };
    let sigma_hat = if d <= DENSIFY_GUARD {
        sigma_dense(model, &weights, sigma_rows)?
    } else {
        sigma_power(model, &weights, sigma_rows, seed)?
    };

    Ok(ProblemConstants {
        mu_hat,
        l_hat,
        sigma_hat,
        kappa_hat: l_hat / mu_hat,
        sigma_is_estimate,
    })
}

/// `sigma = sqrt(||(1/k) sum_i (A_i - A_bar)^2||_2)` over the given rows,
/// with `A_i = d_i x_i x_i^T` (the regularizer cancels in the
/// difference). Dense path.
fn sigma_dense(model: &LogisticModel, weights: &[f64], rows: &[usize]) -> Result<f64> {
    let d = model.d();
    let k = rows.len();
    let feats = &model.data().features;

    // A_bar over the chosen rows
    let mut a_bar = DenseMatrix::zeros(d, d);
    let mut xi = vec![0.0; d];
    for &i in rows {
        xi.iter_mut().for_each(|v| *v = 0.0);
        feats.row_axpy(i, 1.0, &mut xi);
        let di = weights[i];
        for a in 0..d {
            if xi[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                a_bar.set(a, b, a_bar.get(a, b) + di * xi[a] * xi[b]);
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            a_bar.set(a, b, a_bar.get(a, b) / k as f64);
        }
    }

    // second moment: (1/k) sum_i (d_i^2 ||x_i||^2) x_i x_i^T  -  A_bar^2
    let mut sec = DenseMatrix::zeros(d, d);
    for &i in rows {
        xi.iter_mut().for_each(|v| *v = 0.0);
        feats.row_axpy(i, 1.0, &mut xi);
        let di = weights[i];
        let coeff = di * di * dot(&xi, &xi);
        for a in 0..d {
            if xi[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                sec.set(a, b, sec.get(a, b) + coeff * xi[a] * xi[b]);
            }
        }
    }
    let mut m = DenseMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut bar_sq = 0.0;
            for c in 0..d {
                bar_sq += a_bar.get(a, c) * a_bar.get(c, b);
            }
            m.set(a, b, sec.get(a, b) / k as f64 - bar_sq);
        }
    }
    Ok(spectral_norm_sym(&m)?.sqrt())
}

/// Matrix-free power iteration for the same quantity when `d` exceeds the
/// densify guard.
fn sigma_power(model: &LogisticModel, weights: &[f64], rows: &[usize], seed: u64) -> Result<f64> {
    let d = model.d();
    let k = rows.len() as f64;
    let feats = &model.data().features;

    // A_bar v over the chosen rows
    let a_bar = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d];
        for &i in rows {
            let c = weights[i] * feats.row_dot(i, v);
            feats.row_axpy(i, c, &mut out);
        }
        out.iter_mut().for_each(|x| *x /= k);
        out
    };
    // M v = (1/k) sum_i A_i(A_i v) - (1/k)(sum_i A_i)(A_bar v) ... expanded:
    //     = (1/k) sum_i A_i(A_i v) - A_bar(A_bar v)
    //       - A_bar(A_bar v) + A_bar(A_bar v)   [cross terms cancel pairwise]
    // Direct expansion of (1/k) sum (A_i - A_bar)^2 v:
    //     (1/k) sum A_i(A_i v) - (1/k) sum A_i (A_bar v)
    //   - A_bar((1/k) sum A_i v) + A_bar(A_bar v)
    let apply_m = |v: &[f64]| -> Vec<f64> {
        let abv = a_bar(v);
        let mut sum_ai_ai_v = vec![0.0; d];
        let mut sum_ai_abv = vec![0.0; d];
        let mut sum_ai_v = vec![0.0; d];
        for &i in rows {
            let di = weights[i];
            let xi_v = di * feats.row_dot(i, v);
            // A_i v = xi_v * x_i ; A_i(A_i v) = d_i <x_i, A_i v> x_i
            let xi_norm_sq = feats.row_norm_sq(i);
            feats.row_axpy(i, di * xi_v * xi_norm_sq, &mut sum_ai_ai_v);
            let xi_abv = di * feats.row_dot(i, &abv);
            feats.row_axpy(i, xi_abv, &mut sum_ai_abv);
            feats.row_axpy(i, xi_v, &mut sum_ai_v);
        }
        sum_ai_v.iter_mut().for_each(|x| *x /= k);
        let ab_sum = a_bar(&sum_ai_v);
        let ab_abv = a_bar(&abv);
        let mut out = vec![0.0; d];
        for j in 0..d {
            out[j] = sum_ai_ai_v[j] / k - sum_ai_abv[j] / k - ab_sum[j] + ab_abv[j];
        }
        out
    };

    let top = power_iteration(apply_m, d, derive_seed(seed, "constants/sigma-power"))?;
    Ok(top.max(0.0).sqrt())
}

/// Smallest Hessian eigenvalue via power iteration on the shifted
/// operator `c I - H` with `c` an upper spectral bound.
fn min_eig_power(model: &LogisticModel, w: &[f64], all: &[usize]) -> Result<f64> {
    let weights = model.diag_weights(w, all)?;
    let c_shift = model.lambda()
        + all
            .iter()
            .map(|&i| weights[i] * model.data().features.row_norm_sq(i))
            .fold(0.0, f64::max);
    let mut scratch = OracleCounter::new();
    let apply = |v: &[f64]| -> Vec<f64> {
        let hv = model
            .hess_vec(w, v, all, &mut scratch)
            .expect("dimensions fixed by caller");
        v.iter()
            .zip(&hv)
            .map(|(&vj, &hj)| c_shift * vj - hj)
            .collect()
    };
    let top = power_iteration(apply, model.d(), 0x5eed)?;
    Ok(c_shift - top)
}

fn power_iteration<F>(mut apply: F, d: usize, seed: u64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    use rand::Rng;
    let mut rng = SplitMix64::new(seed);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = nrm2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lam = 0.0;
    for _ in 0..POWER_ITERS {
        let av = apply(&v);
        lam = dot(&v, &av);
        // Rayleigh-quotient residual ||A v - lam v||
        let resid: f64 = av
            .iter()
            .zip(&v)
            .map(|(&a, &x)| (a - lam * x) * (a - lam * x))
            .sum::<f64>()
            .sqrt();
        let norm = nrm2(&av);
        if norm == 0.0 {
            return Ok(0.0);
        }
        if resid <= POWER_TOL * lam.abs().max(1e-30) {
            return Ok(lam);
        }
        v = av.iter().map(|&x| x / norm).collect();
    }
    Ok(lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_gen, Dataset};
    use crate::linops::Matrix;

    #[test]
    fn cg_bound_trivia() {
        // equal spectrum: factor 0 for every r
        let eigs = vec![2.0; 6];
        for r in 1..=6 {
            assert_eq!(cg_error_bound(&eigs, r).unwrap(), 0.0);
        }
        // two-point spectrum
        assert!((cg_error_bound(&[1.0, 9.0], 1).unwrap() - 0.64).abs() < 1e-15);
        // r = d is exact termination
        assert_eq!(cg_error_bound(&[1.0, 5.0, 9.0], 3).unwrap(), 0.0);
        assert!(cg_error_bound(&[1.0], 0).is_err());
        assert!(cg_error_bound(&[1.0], 2).is_err());
    }

    #[test]
    fn sample_size_formula() {
        let c = ProblemConstants {
            mu_hat: 0.5,
            l_hat: 1.0,
            sigma_hat: 0.5,
            kappa_hat: 2.0,
            sigma_is_estimate: false,
        };
        assert_eq!(contraction_sample_size(&c), 64);
        let z = ProblemConstants {
            sigma_hat: 0.0,
            ..c
        };
        assert_eq!(contraction_sample_size(&z), 0);
    }

    #[test]
    fn cg_iters_rule() {
        // equal eigenvalues satisfy the threshold immediately
        assert_eq!(contraction_cg_iters(&[3.0, 3.0, 3.0], 10.0), 1);
        // worked two-step example at kappa = 1 (threshold 1/8)
        assert_eq!(contraction_cg_iters(&[1.0, 1.2, 100.0], 1.0), 2);
    }

    #[test]
    fn cg_iters_prefers_clusters() {
        // five clusters (a tight bulk plus four isolated top eigenvalues)
        // vs a wide log-spaced spectrum at equal kappa
        let d = 40;
        let mut clustered: Vec<f64> = (0..d - 4).map(|i| 1.0 + 1e-7 * i as f64).collect();
        clustered.extend_from_slice(&[25.0, 50.0, 75.0, 100.0]);
        let wide: Vec<f64> = (0..d)
            .map(|i| 10f64.powf(2.0 * i as f64 / (d - 1) as f64))
            .collect();
        let kappa = 100.0;
        let r_clustered = contraction_cg_iters(&clustered, kappa);
        let r_wide = contraction_cg_iters(&wide, kappa);
        assert!(r_clustered <= 6, "clustered r = {r_clustered}");
        assert!(
            r_wide > r_clustered && r_wide >= d - 8,
            "wide r = {r_wide} vs clustered {r_clustered}"
        );
    }

    #[test]
    fn cg_iters_monotone_in_kappa() {
        let eigs: Vec<f64> = (0..20).map(|i| 1.0 + 0.37 * i as f64).collect();
        let mut last = 0;
        for kappa in [1.0, 2.0, 5.0, 20.0, 100.0] {
            let r = contraction_cg_iters(&eigs, kappa);
            assert!(r >= last, "kappa {kappa}: {r} < {last}");
            last = r;
        }
    }

    #[test]
    fn work_calculators() {
        let c = ProblemConstants {
            mu_hat: 1.0,
            l_hat: 4.0,
            sigma_hat: 2.0,
            kappa_hat: 4.0,
            sigma_is_estimate: false,
        };
        // eps = 1/e makes the log factor exactly 1
        let eps = (-1.0f64).exp();
        let w = work_ssn_cg(100, 3, &c, 7, eps);
        assert!((w - (100.0 + 3.0 * 4.0) * 7.0).abs() < 1e-9);
        // linear in n
        assert!((work_ssn_cg(200, 3, &c, 7, eps) - w - 100.0 * 7.0).abs() < 1e-9);
        let ns = work_newton_sketch(100, 4.0, 7, eps);
        assert!((ns - (100.0 + 256.0 * 49.0) * 7.0).abs() < 1e-6);
        // worst-case substitution r_bar = d, sigma = L keeps SSN-CG at or
        // below the sketch cost whenever kappa^4 d^2 >= d kappa^2
        let worst = ProblemConstants {
            sigma_hat: c.l_hat,
            ..c.clone()
        };
        assert!(work_ssn_cg(100, 7, &worst, 7, eps) <= ns);
        assert!((sketch_dimension(4.0, 100, 7) - 16.0 * 7.0).abs() < 1e-12);
    }

    fn zero_features_model(n: usize, d: usize, lambda: f64) -> LogisticModel {
        let x = DenseMatrix::zeros(n, d);
        LogisticModel::new(
            Dataset::new(
                Matrix::Dense(x),
                (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect(),
                "zero",
            )
            .unwrap(),
            lambda,
        )
        .unwrap()
    }

    #[test]
    fn constants_for_pure_regularizer() {
        let lambda = 0.7;
        let model = zero_features_model(8, 3, lambda);
        let c = estimate_constants(&model, &[0.0; 3], 8, 1).unwrap();
        assert!((c.mu_hat - lambda).abs() < 1e-12);
        assert!((c.l_hat - lambda).abs() < 1e-12);
        assert!(c.sigma_hat.abs() < 1e-12);
        assert!((c.kappa_hat - 1.0).abs() < 1e-10);
        assert!(!c.sigma_is_estimate);
    }

    #[test]
    fn identical_components_have_zero_variance() {
        // two identical rows: every component Hessian equals the average
        let x = DenseMatrix::new(2, 2, vec![0.5, -1.0, 0.5, -1.0]).unwrap();
        let model = LogisticModel::new(
            Dataset::new(Matrix::Dense(x), vec![1, 1], "dup").unwrap(),
            0.1,
        )
        .unwrap();
        let c = estimate_constants(&model, &[0.2, 0.1], 2, 3).unwrap();
        assert!(c.sigma_hat < 1e-12, "sigma = {}", c.sigma_hat);
    }

    #[test]
    fn constants_match_brute_force() {
        let ds = synth_gen(64, 6, 30.0, 21).unwrap();
        let model = LogisticModel::new(ds, 0.05).unwrap();
        let w: Vec<f64> = (0..6).map(|j| 0.1 * j as f64 - 0.2).collect();
        let c = estimate_constants(&model, &w, 64, 2).unwrap();

        // brute-force oracle: form each component Hessian densely
        let n = model.n();
        let d = model.d();
        let all: Vec<usize> = (0..n).collect();
        let weights = model.diag_weights(&w, &all).unwrap();
        let mut comps: Vec<DenseMatrix> = Vec::with_capacity(n);
        for i in 0..n {
            let mut xi = vec![0.0; d];
            model.data().features.row_axpy(i, 1.0, &mut xi);
            let mut hi = DenseMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let mut v = weights[i] * xi[a] * xi[b];
                    if a == b {
                        v += 0.05;
                    }
                    hi.set(a, b, v);
                }
            }
            comps.push(hi);
        }
        let mut h_bar = DenseMatrix::zeros(d, d);
        for hi in &comps {
            for a in 0..d {
                for b in 0..d {
                    h_bar.set(a, b, h_bar.get(a, b) + hi.get(a, b) / n as f64);
                }
            }
        }
        let mut second = DenseMatrix::zeros(d, d);
        for hi in &comps {
            let mut diff = DenseMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    diff.set(a, b, hi.get(a, b) - h_bar.get(a, b));
                }
            }
            for a in 0..d {
                for b in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += diff.get(a, k) * diff.get(k, b);
                    }
                    second.set(a, b, second.get(a, b) + s / n as f64);
                }
            }
        }
        let sigma_brute = spectral_norm_sym(&second).unwrap().sqrt();
        assert!(
            (c.sigma_hat - sigma_brute).abs() < 1e-10,
            "{} vs {}",
            c.sigma_hat,
            sigma_brute
        );

        let (eigs, _) = sym_eig(&densify_hessian(&model, &w, &all).unwrap()).unwrap();
        assert!((c.mu_hat - eigs[0]).abs() < 1e-12);

        let l_brute = (0..n)
            .map(|i| weights[i] * model.data().features.row_norm_sq(i) + 0.05)
            .fold(f64::MIN, f64::max);
        assert!((c.l_hat - l_brute).abs() < 1e-12);
    }

    #[test]
    fn power_paths_agree_with_dense_paths() {
        let ds = synth_gen(50, 8, 20.0, 31).unwrap();
        let model = LogisticModel::new(ds, 0.08).unwrap();
        let w = vec![0.05; 8];
        let all: Vec<usize> = (0..50).collect();
        let weights = model.diag_weights(&w, &all).unwrap();

        let mu_power = min_eig_power(&model, &w, &all).unwrap();
        let (eigs, _) = sym_eig(&densify_hessian(&model, &w, &all).unwrap()).unwrap();
        assert!(
            (mu_power - eigs[0]).abs() < 1e-7,
            "{mu_power} vs {}",
            eigs[0]
        );

        let s_dense = sigma_dense(&model, &weights, &all).unwrap();
        let s_power = sigma_power(&model, &weights, &all, 5).unwrap();
        assert!(
            (s_dense - s_power).abs() < 1e-6 * s_dense.max(1.0),
            "{s_dense} vs {s_power}"
        );
    }

    #[test]
    fn spectrum_degenerate_cases() {
        let ds = synth_gen(64, 6, 10.0, 41).unwrap();
        let model = LogisticModel::with_default_lambda(ds).unwrap();
        let w = vec![0.0; 6];

        // T = n: no sampling variance on the subsampled side
        let rep = spectrum_report(&model, &w, 64, 32, 3, 9).unwrap();
        for i in 0..6 {
            assert!((rep.sub_mean[i] - rep.true_eigs[i]).abs() < 1e-10);
            assert!((rep.sub_min[i] - rep.sub_max[i]).abs() < 1e-10);
        }

        // one replication collapses min/mean/max
        let rep1 = spectrum_report(&model, &w, 32, 16, 1, 9).unwrap();
        for i in 0..6 {
            assert_eq!(rep1.sub_min[i], rep1.sub_max[i]);
            assert_eq!(rep1.sub_min[i], rep1.sub_mean[i]);
            assert_eq!(rep1.sketch_min[i], rep1.sketch_max[i]);
        }
        // lower spectral edge respects the regularizer
        assert!(rep.true_eigs[0] >= model.lambda() - 1e-10);
    }

    #[test]
    fn spectrum_csv_shape() {
        let ds = synth_gen(32, 4, 5.0, 2).unwrap();
        let model = LogisticModel::with_default_lambda(ds).unwrap();
        let rep = spectrum_report(&model, &[0.0; 4], 16, 8, 2, 1).unwrap();
        let csv = rep.to_csv_string();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("index,true,sub_mean"));
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
