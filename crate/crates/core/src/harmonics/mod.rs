//! Harmonic expansion of shell coordinates.
//!
//! A coordinate function on the shell is expanded as
//! `f(η, φ) ≈ Σₙ Σₘ Aₘⁿ P̄ₙᵐ(ξ(η)) e^{imφ}` with `n ≤ N_max`, `|m| ≤ n`.
//! The weights of x, y and z form a `β × 3` complex matrix, `β = (N_max+1)²`,
//! stored n-major with m ascending from −n.

mod alp;
mod basis;
mod decompose;
mod projection;
mod weights_file;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spheroidal::{Frame, SpheroidDomain};

pub use alp::{alp_table, normalized_alp, tri_index, MAX_DEGREE};
pub use basis::{basis_matrix, reconstruct_fast, reconstruct_full, reconstruct_full_complex, BasisEvaluator};
pub use decompose::{decompose, decompose_points, fit_and_decompose, Decomposition, DENSE_LIMIT};
pub use projection::{gauss_legendre, project_function};
pub use weights_file::{load_weights, save_weights, weights_from_json, weights_to_json};

/// Degree bound and derived basis sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionConfig {
    n_max: usize,
}

impl ExpansionConfig {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max > MAX_DEGREE {
            return Err(Error::Guard {
                what: "expansion degree",
                value: n_max,
                limit: MAX_DEGREE,
            });
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of complex weights, `(N_max+1)²`.
    pub fn beta(&self) -> usize {
        beta(self.n_max)
    }

    /// Number of terms with `m ≥ 0`, `(N_max+1)(N_max+2)/2`.
    pub fn beta_hat(&self) -> usize {
        beta_hat(self.n_max)
    }
}

pub fn beta(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 1)
}

pub fn beta_hat(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 2) / 2
}

/// Row of `(n, m)` in the weight matrix.
#[inline]
pub fn row_index(n: usize, m: i64) -> usize {
    ((n * n + n) as i64 + m) as usize
}

/// Inverse of [`row_index`].
pub fn row_degree_order(row: usize) -> (usize, i64) {
    let n = (row as f64).sqrt() as usize;
    let n = if (n + 1) * (n + 1) <= row {
        n + 1
    } else if n * n > row {
        n - 1
    } else {
        n
    };
    (n, row as i64 - (n * n + n) as i64)
}

/// Complex weights for x, y, z on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierWeights {
    n_max: usize,
    domain: SpheroidDomain,
    q: Vec<[Complex64; 3]>,
    /// Placement of the domain frame in world space.
    pub frame: Frame,
}

impl FourierWeights {
    pub fn new(domain: SpheroidDomain, n_max: usize, q: Vec<[Complex64; 3]>) -> Result<Self> {
        ExpansionConfig::new(n_max)?;
        if q.len() != beta(n_max) {
            return Err(Error::InvalidInput(format!(
                "{} weight rows for n_max = {n_max} (expected {})",
                q.len(),
                beta(n_max)
            )));
        }
        Ok(Self {
            n_max,
            domain,
            q,
            frame: Frame::identity(),
        })
    }

    pub fn zeros(domain: SpheroidDomain, n_max: usize) -> Result<Self> {
        Self::new(domain, n_max, vec![[Complex64::default(); 3]; beta(n_max)])
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn domain(&self) -> &SpheroidDomain {
        &self.domain
    }

    pub fn rows(&self) -> &[[Complex64; 3]] {
        &self.q
    }

    pub fn get(&self, n: usize, m: i64) -> [Complex64; 3] {
        self.q[row_index(n, m)]
    }

    pub fn set(&mut self, n: usize, m: i64, value: [Complex64; 3]) {
        self.q[row_index(n, m)] = value;
    }

    /// Copy restricted to degrees `≤ n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        let n_max = n_max.min(self.n_max);
        Self {
            n_max,
            domain: self.domain,
            q: self.q[..beta(n_max)].to_vec(),
            frame: self.frame,
        }
    }

    /// Largest violation of `A₋ₘ = (−1)ᵐ conj(Aₘ)` over all rows.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..=self.n_max {
            for m in 0..=n as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let (pos, neg) = (self.get(n, m), self.get(n, -m));
                for d in 0..3 {
                    worst = worst.max((neg[d] - pos[d].conj() * sign).norm());
                }
            }
        }
        worst
    }
}

/// Per-degree power `Σₘ |Aₘⁿ|²` of each coordinate column.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdDescriptors {
    pub power: Vec<[f64; 3]>,
}

pub fn psd_descriptors(weights: &FourierWeights) -> PsdDescriptors {
    let power = (0..=weights.n_max)
        .map(|n| {
            let mut p = [0.0; 3];
            for m in -(n as i64)..=n as i64 {
                let w = weights.get(n, m);
                for d in 0..3 {
                    p[d] += w[d].norm_sqr();
                }
            }
            p
        })
        .collect();
    PsdDescriptors { power }
}
