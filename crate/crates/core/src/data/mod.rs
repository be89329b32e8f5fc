//! Dataset ingestion, synthetic problem generation, and splitting.

mod libsvm;
mod synth;

pub use libsvm::{read_libsvm, write_libsvm};
pub use synth::synth_gen;

use crate::error::{Error, Result};
use crate::linops::{CsrMatrix, DenseMatrix, Matrix};
use crate::rng::{sample_without_replacement, SplitMix64};

/// Binary classification dataset with labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<i8>,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<i8>, name: impl Into<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                op: "Dataset::new",
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::UnmappableLabels {
                labels: vec![i64::from(bad)],
            });
        }
        Ok(Self {
            features,
            labels,
            name: name.into(),
        })
    }

    /// Number of examples.
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    /// Number of features.
    pub fn d(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn label(&self, i: usize) -> f64 {
        f64::from(self.labels[i])
    }

    /// New dataset holding the given rows (in the given order), keeping the
    /// storage kind of the parent.
    pub fn subset(&self, rows: &[usize], name: impl Into<String>) -> Result<Self> {
        let labels: Vec<i8> = rows.iter().map(|&i| self.labels[i]).collect();
        let features = match &self.features {
            Matrix::Dense(m) => {
                let mut data = Vec::with_capacity(rows.len() * m.cols());
                for &i in rows {
                    data.extend_from_slice(m.row(i));
                }
                Matrix::Dense(DenseMatrix::new(rows.len(), m.cols(), data)?)
            }
            Matrix::Csr(m) => {
                let mut offsets = vec![0usize];
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                for &i in rows {
                    for (j, v) in m.row_iter(i) {
                        cols.push(j);
                        vals.push(v);
                    }
                    offsets.push(vals.len());
                }
                Matrix::Csr(CsrMatrix::new(rows.len(), m.cols(), offsets, cols, vals)?)
            }
        };
        Dataset::new(features, labels, name)
    }
}

/// Disjoint train/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Uniformly random disjoint train/test partition, deterministic in `seed`.
///
/// The test side gets `floor(n * test_frac)` rows and the train side the
/// rest; `test_frac` must leave at least one row on each side.
pub fn split(ds: &Dataset, test_frac: f64, seed: u64) -> Result<SplitDataset> {
    let n = ds.n();
    if !(0.0..1.0).contains(&test_frac) {
        return Err(Error::InvalidParam(format!(
            "test_frac {test_frac} outside (0,1)"
        )));
    }
    let n_test = (n as f64 * test_frac).floor() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidParam(format!(
            "degenerate split: n={n}, test_frac={test_frac} gives {n_test} test rows"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let perm = sample_without_replacement(&mut rng, n, n);
    let mut train_rows = perm[..n - n_test].to_vec();
    let mut test_rows = perm[n - n_test..].to_vec();
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(SplitDataset {
        train: ds.subset(&train_rows, format!("{}.train", ds.name))?,
        test: ds.subset(&test_rows, format!("{}.test", ds.name))?,
        seed,
    })
}
