//! libsvm text-format reader and writer.
//!
//! Lines have the form `<label> <idx>:<val> ...` with 1-based, strictly
//! ascending feature indices. Labels are mapped to `{-1,+1}`: sets
//! `{0,1}` map `0 -> -1`, sets `{1,2}` map `2 -> -1`, and `{-1,+1}` passes
//! through. Matrices denser than 25% are stored dense, the rest as CSR.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linops::{CsrMatrix, Matrix};

const DENSE_THRESHOLD: f64 = 0.25;

pub fn read_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let pstr = path.display().to_string();

    let mut raw_labels: Vec<f64> = Vec::new();
    let mut offsets: Vec<usize> = vec![0];
    let mut col_indices: Vec<usize> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut d = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let label_tok = parts.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            path: pstr.clone(),
            line: lineno,
            msg: format!("bad label {label_tok:?}"),
        })?;
        raw_labels.push(label);

        let mut prev_idx = 0usize;
        for tok in parts {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                msg: format!("bad feature index {idx_s:?}"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                path: pstr.clone(),
                line: lineno,
                msg: format!("bad feature value {val_s:?}"),
            })?;
            if idx == 0 || idx <= prev_idx {
                return Err(Error::Parse {
                    path: pstr.clone(),
                    line: lineno,
                    msg: format!(
                        "indices must be 1-based and ascending, got {idx} after {prev_idx}"
                    ),
                });
            }
            prev_idx = idx;
            d = d.max(idx);
            col_indices.push(idx - 1);
            values.push(val);
        }
        offsets.push(values.len());
    }

    let n = raw_labels.len();
    let labels = map_labels(&raw_labels, &pstr)?;

    let nnz = values.len();
    let density = if n * d == 0 {
        1.0
    } else {
        nnz as f64 / (n * d) as f64
    };
    let csr = CsrMatrix::new(n, d, offsets, col_indices, values)?;
    let features = if density < DENSE_THRESHOLD {
        Matrix::Csr(csr)
    } else {
        Matrix::Dense(csr.to_dense())
    };

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::new(features, labels, name)
}

fn map_labels(raw: &[f64], path: &str) -> Result<Vec<i8>> {
    let mut distinct: Vec<i64> = Vec::new();
    for (i, &v) in raw.iter().enumerate() {
        if v.fract() != 0.0 || !(-2.0..=2.0).contains(&v) {
            return Err(Error::Parse {
                path: path.to_string(),
                line: i + 1,
                msg: format!("label {v} is not one of -1/0/1/2"),
            });
        }
        let k = v as i64;
        if !distinct.contains(&k) {
            distinct.push(k);
        }
    }
    distinct.sort_unstable();
    let ok = |allowed: &[i64]| distinct.iter().all(|l| allowed.contains(l));
    let map: fn(i64) -> i8 = if ok(&[-1, 1]) {
        |l| l as i8
    } else if ok(&[0, 1]) {
        |l| if l == 0 { -1 } else { 1 }
    } else if ok(&[1, 2]) {
        |l| if l == 2 { -1 } else { 1 }
    } else {
        return Err(Error::UnmappableLabels { labels: distinct });
    };
    Ok(raw.iter().map(|&v| map(v as i64)).collect())
}

/// Writes a dataset in libsvm format: `%.17g`-style values, space
/// separators, 1-based indices, LF line endings.
pub fn write_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for i in 0..ds.n() {
        write!(w, "{}", ds.labels[i])?;
        for (j, v) in ds.features.row_entries(i) {
            write!(w, " {}:{}", j + 1, fmt_g17(v))?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Formats with 17 significant digits in the style of C's `%.17g`:
/// fixed notation for decimal exponents in `[-4, 17)`, scientific
/// otherwise, trailing zeros stripped. 17 digits round-trip any f64.
fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp_s) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp_s.parse().expect("numeric exponent");
    if (-4..17).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.prec$}"))
    } else {
        format!("{}e{:+03}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
