//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Adequate for the matrix sizes this crate handles (a few thousand at
//! most, a few hundred in practice) and unconditionally stable on
//! symmetric input.

use crate::error::{Error, Result};
use crate::linops::DenseMatrix;

const MAX_SWEEPS: usize = 60;
const SYM_TOL: f64 = 1e-10;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and a matrix whose column `i` is
/// the eigenvector for eigenvalue `i`, with residuals
/// `||A v - lambda v|| <= ~1e-8 ||A||`.
pub fn sym_eig(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let scale = a.max_abs();
    if scale > 0.0 {
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((a.get(i, j) - a.get(j, i)).abs());
            }
        }
        if asym > SYM_TOL * scale {
            return Err(Error::NotSymmetric(asym / scale));
        }
    }
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }

    // Work on a symmetrized copy; rotations only touch the upper triangle.
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }

    let mut v = DenseMatrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 1..=MAX_SWEEPS {
        let mut off_sum = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sum += m.get(p, q).abs();
            }
        }
        if off_sum == 0.0 {
            return Ok(sorted(d, v));
        }
        let thresh = if sweep < 4 {
            0.2 * off_sum / (n * n) as f64
        } else {
            0.0
        };

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                let g = 100.0 * apq.abs();
                // Off-diagonal entry is negligible relative to both
                // diagonals: zero it and move on.
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    m.set(p, q, 0.0);
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }

                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;

                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                m.set(p, q, 0.0);

                for j in 0..p {
                    let gj = m.get(j, p);
                    let hj = m.get(j, q);
                    m.set(j, p, gj - s * (hj + gj * tau));
                    m.set(j, q, hj + s * (gj - hj * tau));
                }
                for j in (p + 1)..q {
                    let gj = m.get(p, j);
                    let hj = m.get(j, q);
                    m.set(p, j, gj - s * (hj + gj * tau));
                    m.set(j, q, hj + s * (gj - hj * tau));
                }
                for j in (q + 1)..n {
                    let gj = m.get(p, j);
                    let hj = m.get(q, j);
                    m.set(p, j, gj - s * (hj + gj * tau));
                    m.set(q, j, hj + s * (gj - hj * tau));
                }
                for j in 0..n {
                    let gj = v.get(j, p);
                    let hj = v.get(j, q);
                    v.set(j, p, gj - s * (hj + gj * tau));
                    v.set(j, q, hj + s * (gj - hj * tau));
                }
            }
        }

        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }

    Err(Error::NoConvergence(format!(
        "Jacobi eigensolver exceeded {MAX_SWEEPS} sweeps on a {n}x{n} matrix"
    )))
}

fn sorted(d: Vec<f64>, v: DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigs: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vs = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vs.set(r, new_col, v.get(r, old_col));
        }
    }
    (eigs, vs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use rand::Rng;

    #[test]
    fn identity_eigenvalues() {
        let (eigs, _) = sym_eig(&DenseMatrix::identity(4)).unwrap();
        for e in eigs {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let mut a = DenseMatrix::zeros(3, 3);
        a.set(0, 0, 3.0);
        a.set(1, 1, 1.0);
        a.set(2, 2, 2.0);
        let (eigs, v) = sym_eig(&a).unwrap();
        assert_eq!(eigs, vec![1.0, 2.0, 3.0]);
        // eigenvector for eigenvalue 1 is e_1
        assert!((v.get(1, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let mut rng = SplitMix64::new(23);
        let n = 12;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.random::<f64>() * 2.0 - 1.0;
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        let (eigs, v) = sym_eig(&a).unwrap();
        // A == V diag(eigs) V^T
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += v.get(i, k) * eigs[k] * v.get(j, k);
                }
                assert!(
                    (s - a.get(i, j)).abs() < 1e-9,
                    "entry ({i},{j}): {s} vs {}",
                    a.get(i, j)
                );
            }
        }
        // residual check ||A v - lambda v||
        let norm = a.max_abs();
        for k in 0..n {
            let col: Vec<f64> = (0..n).map(|r| v.get(r, k)).collect();
            let av = a.matvec(&col).unwrap();
            for r in 0..n {
                assert!((av[r] - eigs[k] * col[r]).abs() <= 1e-8 * norm);
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 5.0, -5.0, 1.0]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn rejects_non_square() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&a), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn zero_matrix() {
        let (eigs, _) = sym_eig(&DenseMatrix::zeros(3, 3)).unwrap();
        assert_eq!(eigs, vec![0.0, 0.0, 0.0]);
    }
}
