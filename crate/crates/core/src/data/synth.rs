//! Synthetic binary-classification problems with a controlled condition
//! number.
//!
//! The feature matrix is `X = G diag(s) Q^T` with `G` standard normal,
//! `Q` a Haar-random orthogonal matrix, and singular scales `s` log-spaced
//! in `[1/sqrt(kappa_target), 1]`, so the spectrum of `X^T X / n` spans a
//! factor of about `kappa_target`. Labels come from a random hyperplane
//! with 5% of them flipped so the optimum stays non-degenerate.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linops::{dot, DenseMatrix, Matrix};
use crate::par;
use crate::rng::{derive_seed, sample_without_replacement, SplitMix64};

const LABEL_FLIP_RATE: f64 = 0.05;

pub fn synth_gen(n: usize, d: usize, kappa_target: f64, seed: u64) -> Result<Dataset> {
    if d < 2 || n < d {
        return Err(Error::InvalidParam(format!(
            "need n >= d >= 2, got n={n}, d={d}"
        )));
    }
    if !(kappa_target >= 1.0) {
        return Err(Error::InvalidParam(format!(
            "kappa_target must be >= 1, got {kappa_target}"
        )));
    }

    let mut g_rng = SplitMix64::new(derive_seed(seed, "synth/gauss"));
    let g: Vec<f64> = (0..n * d).map(|_| g_rng.sample(StandardNormal)).collect();

    let q = random_orthogonal(d, derive_seed(seed, "synth/basis"));

    let s_min = 1.0 / kappa_target.sqrt();
    let log_lo = s_min.ln();
    let scales: Vec<f64> = (0..d)
        .map(|j| {
            let t = if d == 1 {
                1.0
            } else {
                j as f64 / (d - 1) as f64
            };
            (log_lo * (1.0 - t)).exp()
        })
        .collect();

    // row_i(X) = Q (s .* g_i)
    let rows = par::map_chunks(n, |range| {
        let mut block = Vec::with_capacity(range.len() * d);
        let mut tmp = vec![0.0; d];
        for i in range {
            for j in 0..d {
                tmp[j] = g[i * d + j] * scales[j];
            }
            for r in 0..d {
                block.push(dot(q.row(r), &tmp));
            }
        }
        block
    });
    let x = DenseMatrix::new(n, d, rows.concat())?;

    let mut w_rng = SplitMix64::new(derive_seed(seed, "synth/plane"));
    let mut w_bar: Vec<f64> = (0..d).map(|_| w_rng.sample(StandardNormal)).collect();
    let norm = dot(&w_bar, &w_bar).sqrt();
    for v in &mut w_bar {
        *v /= norm;
    }

    let mut labels: Vec<i8> = (0..n)
        .map(|i| if dot(x.row(i), &w_bar) < 0.0 { -1 } else { 1 })
        .collect();

    let flips = (LABEL_FLIP_RATE * n as f64).round() as usize;
    let mut f_rng = SplitMix64::new(derive_seed(seed, "synth/flips"));
    for i in sample_without_replacement(&mut f_rng, n, flips) {
        labels[i] = -labels[i];
    }

    Dataset::new(
        Matrix::Dense(x),
        labels,
        format!("synth-n{n}-d{d}-k{kappa_target:.0}"),
    )
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix via
/// modified Gram–Schmidt (the positive-diagonal R makes the factor unique).
fn random_orthogonal(d: usize, seed: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    // columns stored contiguously during orthogonalization
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj = dot(&cols[j], &cols[k]);
            let prev = cols[k].clone();
            for (cj, pk) in cols[j].iter_mut().zip(&prev) {
                *cj -= proj * pk;
            }
        }
        let norm = dot(&cols[j], &cols[j]).sqrt();
        for v in &mut cols[j] {
            *v /= norm;
        }
    }
    let mut q = DenseMatrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..d {
            q.set(i, j, col[i]);
        }
    }
    q
}
