//! Fast Walsh–Hadamard transform.

use crate::error::{Error, Result};

/// In-place orthonormal Walsh–Hadamard transform.
///
/// Applies the symmetric orthonormal Hadamard matrix `H` (so `H H = I` and
/// the 2-norm is preserved). The butterfly runs in `O(n log n)` and the
/// final pass scales by `1/sqrt(n)`.
pub fn fwht_inplace(x: &mut [f64]) -> Result<()> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        let mut block = 0;
        while block < n {
            for i in block..block + h {
                let a = x[i];
                let b = x[i + h];
                x[i] = a + b;
                x[i + h] = a - b;
            }
            block += h * 2;
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

/// Out-of-place convenience wrapper around [`fwht_inplace`].
pub fn fwht(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    fwht_inplace(&mut out)?;
    Ok(out)
}
