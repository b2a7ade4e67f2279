//! Fully normalized associated Legendre functions.
//!
//! `P̄ₙᵐ(ξ) = √((2n+1)/(4π) · (n−m)!/(n+m)!) · Pₙᵐ(ξ)`, Condon–Shortley phase
//! included, so that `P̄ₙᵐ(ξ) e^{imφ}` is orthonormal over `[−1,1]×[0,2π)`.
//! Values come from the diagonal, sub-diagonal and three-term column
//! recurrences, which never form a factorial.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest degree accepted by the recurrences.
pub const MAX_DEGREE: usize = 80;

/// Position of `(n, m)`, `0 ≤ m ≤ n`, in a triangular table.
#[inline]
pub fn tri_index(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Single value `P̄ₙᵐ(ξ)`.
pub fn normalized_alp(n: usize, m: usize, xi: f64) -> Result<f64> {
    if m > n || n > MAX_DEGREE {
        return Err(Error::InvalidInput(format!(
            "need 0 <= m <= n <= {MAX_DEGREE}, got n = {n}, m = {m}"
        )));
    }
    if !(xi.abs() <= 1.0) {
        return Err(Error::OutOfRange(format!("xi = {xi} outside [-1, 1]")));
    }
    let mut table = vec![0.0; tri_index(n, n) + 1];
    alp_table(n, xi, &mut table);
    Ok(table[tri_index(n, m)])
}

/// Fills `out[tri_index(n, m)]` for all `0 ≤ m ≤ n ≤ n_max`.
///
/// `xi` must lie in `[−1, 1]`; `out` needs `(n_max+1)(n_max+2)/2` slots.
pub fn alp_table(n_max: usize, xi: f64, out: &mut [f64]) {
    debug_assert!(out.len() > tri_index(n_max, n_max));
    let s = (1.0 - xi * xi).max(0.0).sqrt();
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=n_max {
        if m > 0 {
            diag *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        out[tri_index(m, m)] = diag;
        if m == n_max {
            break;
        }
        let mut prev2 = diag;
        let mut prev1 = ((2 * m + 3) as f64).sqrt() * xi * diag;
        out[tri_index(m + 1, m)] = prev1;
        for n in m + 2..=n_max {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
            let cur = a * (xi * prev1 - b * prev2);
            out[tri_index(n, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
}
