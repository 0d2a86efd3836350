//! Small dense symmetric positive-definite solves on row-major buffers.

use crate::error::{Error, Result};

/// In-place lower Cholesky factor of a row-major `n × n` matrix.
fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

/// Cholesky factor of an SPD matrix. On failure the diagonal is loaded with
/// `1e-12 · trace / n` and the factorization retried once.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = a.to_vec();
    if cholesky_in_place(&mut l, n) {
        return Ok(l);
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let jitter = 1e-12 * trace.abs().max(f64::MIN_POSITIVE) / n as f64;
    l.copy_from_slice(a);
    for i in 0..n {
        l[i * n + i] += jitter;
    }
    if cholesky_in_place(&mut l, n) {
        Ok(l)
    } else {
        Err(Error::Factorization)
    }
}

/// Solves `L Lᵀ x = b` given the lower factor.
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Lower-triangular inverse `L⁻¹`, row-major.
fn lower_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        inv[j * n + j] = 1.0 / l[j * n + j];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * n + k] * inv[k * n + j];
            }
            inv[i * n + j] = s / l[i * n + i];
        }
    }
    inv
}

/// Diagonal of `(L Lᵀ)⁻¹ = L⁻ᵀ L⁻¹`.
pub(crate) fn inverse_diagonal(l: &[f64], n: usize) -> Vec<f64> {
    let inv = lower_inverse(l, n);
    (0..n)
        .map(|i| (i..n).map(|k| inv[k * n + i] * inv[k * n + i]).sum())
        .collect()
}

/// Full inverse `(L Lᵀ)⁻¹`, row-major.
pub(crate) fn inverse(l: &[f64], n: usize) -> Vec<f64> {
    let inv = lower_inverse(l, n);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|k| inv[k * n + i] * inv[k * n + j]).sum();
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}
