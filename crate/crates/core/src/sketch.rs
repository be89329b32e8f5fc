//! Randomized Hadamard sketching of the square-root Hessian.
//!
//! The sketch operator draws `m` rows of `sqrt(n_pad) * H * diag(signs)`,
//! where `H` is the orthonormal Hadamard matrix on the zero-padded space
//! and the signs are Rademacher. Each realized row has entries in
//! `{-1,+1}`, and row picks are i.i.d. uniform, so `E[S^T S / m] = I` on
//! the padded space. Padding rows of the square root are zero, so the
//! padded Gram equals the unpadded one and no correction is needed.
//!
//! The per-iteration matrix `B = S (1/sqrt(n)) D^{1/2} X` is materialized
//! densely (`m x d`) once per outer iteration; sketched Hessian-vector
//! products then cost two dense matvecs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linops::{fwht_inplace, DenseMatrix, Matrix};
use crate::par;
use crate::problem::{LogisticModel, OracleCounter};
use crate::rng::{derive_seed, SplitMix64};

/// Abstraction over sketch operators: anything that maps a length-`n`
/// vector to `m` sketched coordinates with `E[S^T S / m] = I`.
pub trait SketchOperator {
    fn input_len(&self) -> usize;
    fn rows(&self) -> usize;
    fn apply(&self, u: &[f64]) -> Result<Vec<f64>>;
}

/// Randomized orthogonal system sketch: subsampled randomized Hadamard
/// rows. Deterministic in its seed.
#[derive(Debug, Clone)]
pub struct RosSketch {
    n: usize,
    n_pad: usize,
    m: usize,
    signs: Vec<f64>,
    row_picks: Vec<usize>,
    pub seed: u64,
}

impl RosSketch {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParam(format!(
                "sketch needs n >= 1 and m >= 1, got n={n}, m={m}"
            )));
        }
        let n_pad = n.next_power_of_two();
        let mut sign_rng = SplitMix64::new(derive_seed(seed, "ros/signs"));
        let signs: Vec<f64> = (0..n_pad)
            .map(|_| if sign_rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut pick_rng = SplitMix64::new(derive_seed(seed, "ros/rows"));
        let row_picks: Vec<usize> = (0..m).map(|_| pick_rng.random_range(0..n_pad)).collect();
        Ok(Self {
            n,
            n_pad,
            m,
            signs,
            row_picks,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_pad(&self) -> usize {
        self.n_pad
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Applies the sketch to a padded scratch buffer in place and gathers
    /// the picked rows. `buf` must have length `n_pad` with the tail
    /// already zeroed; entries `0..n` hold the input.
    fn apply_padded(&self, buf: &mut [f64]) -> Vec<f64> {
        debug_assert_eq!(buf.len(), self.n_pad);
        for (v, s) in buf.iter_mut().zip(&self.signs) {
            *v *= s;
        }
        fwht_inplace(buf).expect("padded length is a power of two");
        let scale = (self.n_pad as f64).sqrt();
        self.row_picks.iter().map(|&r| buf[r] * scale).collect()
    }

    /// The sketch as an explicit `m x n_pad` matrix (tests and small
    /// problems only).
    pub fn dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.m, self.n_pad);
        let mut buf = vec![0.0; self.n_pad];
        for j in 0..self.n_pad {
            buf.fill(0.0);
            buf[j] = 1.0;
            let col = self.apply_padded(&mut buf);
            for i in 0..self.m {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}

impl SketchOperator for RosSketch {
    fn input_len(&self) -> usize {
        self.n
    }

    fn rows(&self) -> usize {
        self.m
    }

    /// `S u`: zero-pad, sign-flip, FWHT, rescale, gather picked rows.
    /// Costs `O(n_pad log n_pad)`.
    fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                op: "RosSketch::apply",
                expected: self.n,
                got: u.len(),
            });
        }
        let mut buf = vec![0.0; self.n_pad];
        buf[..self.n].copy_from_slice(u);
        Ok(self.apply_padded(&mut buf))
    }
}

/// Dense Gaussian sketch with the same normalization contract
/// (`E[S^T S / m] = I`). Kept as an independent cross-check of the
/// Hadamard implementation in tests; quadratic cost, not for real runs.
#[derive(Debug, Clone)]
pub struct GaussianSketch {
    mat: DenseMatrix,
}

impl GaussianSketch {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParam("sketch needs n, m >= 1".into()));
        }
        let mut rng = SplitMix64::new(derive_seed(seed, "gauss/entries"));
        let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self {
            mat: DenseMatrix::new(m, n, data)?,
        })
    }

    pub fn dense(&self) -> &DenseMatrix {
        &self.mat
    }
}

impl SketchOperator for GaussianSketch {
    fn input_len(&self) -> usize {
        self.mat.cols()
    }

    fn rows(&self) -> usize {
        self.mat.rows()
    }

    fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.mat.matvec(u)
    }
}

/// The sketched square-root Hessian `B = S (1/sqrt(n)) D^{1/2} X` for one
/// iterate, plus the regularizer applied outside the sketch.
#[derive(Debug, Clone)]
pub struct SketchedSqrt {
    b: DenseMatrix,
    lambda: f64,
    m: usize,
    /// Outer-iteration tag of the iterate this sketch was built at;
    /// callers rebuild whenever the iterate moves.
    pub w_tag: u64,
}

impl SketchedSqrt {
    pub fn from_parts(b: DenseMatrix, lambda: f64, w_tag: u64) -> Self {
        let m = b.rows();
        Self {
            b,
            lambda,
            m,
            w_tag,
        }
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sketched Hessian-vector product `(1/m) B^T (B p) + lambda p`,
    /// computed in two steps; charges `2m` component Hessian-vector
    /// units (two `m x d` matvecs).
    pub fn hess_vec(&self, p: &[f64], counter: &mut OracleCounter) -> Result<Vec<f64>> {
        if p.len() != self.b.cols() {
            return Err(Error::DimensionMismatch {
                op: "SketchedSqrt::hess_vec",
                expected: self.b.cols(),
                got: p.len(),
            });
        }
        let v1 = self.b.matvec(p)?;
        let mut v = self.b.matvec_t(&v1)?;
        let inv_m = 1.0 / self.m as f64;
        for (vj, &pj) in v.iter_mut().zip(p) {
            *vj = *vj * inv_m + self.lambda * pj;
        }
        counter.component_hvs += 2 * self.m as u64;
        Ok(v)
    }

    /// Explicit `(1/m) B^T B + lambda I` (spectrum reports and tests).
    pub fn densify(&self) -> DenseMatrix {
        let d = self.b.cols();
        let mut g = self.b.gram();
        let inv_m = 1.0 / self.m as f64;
        for i in 0..d {
            for j in 0..d {
                let v = g.get(i, j) * inv_m + if i == j { self.lambda } else { 0.0 };
                g.set(i, j, v);
            }
        }
        g
    }
}

/// Builds `B` column by column: column `j` of `(1/sqrt(n)) D^{1/2} X` is
/// sketched with one FWHT pass, so the weighted matrix is never
/// materialized (sparse feature columns come from the CSC mirror).
pub fn build_sketched_sqrt<S: SketchOperator + Sync>(
    model: &LogisticModel,
    w: &[f64],
    sketch: &S,
    w_tag: u64,
) -> Result<SketchedSqrt> {
    let n = model.n();
    let d = model.d();
    if sketch.input_len() != n {
        return Err(Error::DimensionMismatch {
            op: "build_sketched_sqrt",
            expected: n,
            got: sketch.input_len(),
        });
    }
    let scales = model.sqrt_row_scales(w)?;
    let m = sketch.rows();

    let columns: Vec<Result<Vec<f64>>> = par::map_indexed(d, |j| {
        let mut col = vec![0.0; n];
        match &model.data().features {
            Matrix::Dense(x) => {
                for i in 0..n {
                    col[i] = x.get(i, j) * scales[i];
                }
            }
            Matrix::Csr(_) => {
                let csc = model.csc().expect("CSR features carry a CSC mirror");
                for (i, v) in csc.col_iter(j) {
                    col[i] = v * scales[i];
                }
            }
        }
        sketch.apply(&col)
    });

    let mut b = DenseMatrix::zeros(m, d);
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for i in 0..m {
            b.set(i, j, col[i]);
        }
    }
    Ok(SketchedSqrt::from_parts(b, model.lambda(), w_tag))
}
