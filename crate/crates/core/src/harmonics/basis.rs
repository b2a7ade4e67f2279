use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::alp::{alp_table, tri_index};
use super::{beta, beta_hat, row_index, ExpansionConfig, FourierWeights};
use crate::error::{Error, Result};
use crate::mesh::Vec3;
use crate::spheroidal::{CurvilinearCoords, SpheroidDomain};

/// Evaluates basis values `P̄ₙᵐ(ξ(η)) e^{imφ}` on one domain.
#[derive(Debug, Clone, Copy)]
pub struct BasisEvaluator {
    domain: SpheroidDomain,
    n_max: usize,
}

impl BasisEvaluator {
    pub fn new(domain: SpheroidDomain, config: ExpansionConfig) -> Self {
        Self {
            domain,
            n_max: config.n_max(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Triangular table of `P̄ₙᵐ(ξ(η))`, `m ≥ 0`.
    pub fn legendre(&self, eta: f64, out: &mut [f64]) {
        alp_table(self.n_max, self.domain.xi(eta).clamp(-1.0, 1.0), out);
    }

    /// Full complex row (β entries) at one sample.
    pub fn row(&self, eta: f64, phi: f64, out: &mut [Complex64]) {
        let mut p = vec![0.0; beta_hat(self.n_max)];
        self.legendre(eta, &mut p);
        for n in 0..=self.n_max {
            for m in 0..=n {
                let y = Complex64::from_polar(p[tri_index(n, m)], m as f64 * phi);
                out[row_index(n, m as i64)] = y;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    out[row_index(n, -(m as i64))] = y.conj() * sign;
                }
            }
        }
    }
}

/// Dense `n_v × β` matrix of complex basis values.
pub fn basis_matrix(coords: &CurvilinearCoords, config: ExpansionConfig) -> DMatrix<Complex64> {
    let ev = BasisEvaluator::new(*coords.domain(), config);
    let b = config.beta();
    let rows: Vec<Vec<Complex64>> = (0..coords.len())
        .into_par_iter()
        .map(|i| {
            let mut r = vec![Complex64::default(); b];
            ev.row(coords.eta()[i], coords.phi()[i], &mut r);
            r
        })
        .collect();
    DMatrix::from_fn(coords.len(), b, |i, j| rows[i][j])
}

fn check_domain(weights: &FourierWeights, coords: &CurvilinearCoords) -> Result<()> {
    if weights.domain() != coords.domain() {
        return Err(Error::InvalidInput(format!(
            "coordinates live on {:?} but weights on {:?}",
            coords.domain(),
            weights.domain()
        )));
    }
    Ok(())
}

/// Complex-valued double sum over all `(n, m)`; the imaginary parts are
/// round-off for weights of real data.
pub fn reconstruct_full_complex(weights: &FourierWeights, coords: &CurvilinearCoords) -> Result<Vec<[Complex64; 3]>> {
    check_domain(weights, coords)?;
    let config = ExpansionConfig::new(weights.n_max())?;
    let ev = BasisEvaluator::new(*weights.domain(), config);
    let q = weights.rows();
    Ok((0..coords.len())
        .into_par_iter()
        .map_init(
            || vec![Complex64::default(); beta(config.n_max())],
            |row, i| {
                ev.row(coords.eta()[i], coords.phi()[i], row);
                let mut acc = [Complex64::default(); 3];
                for (y, w) in row.iter().zip(q) {
                    for d in 0..3 {
                        acc[d] += y * w[d];
                    }
                }
                acc
            },
        )
        .collect())
}

/// Real part of [`reconstruct_full_complex`].
pub fn reconstruct_full(weights: &FourierWeights, coords: &CurvilinearCoords) -> Result<Vec<Vec3>> {
    Ok(reconstruct_full_complex(weights, coords)?
        .into_iter()
        .map(|c| Vec3::new(c[0].re, c[1].re, c[2].re))
        .collect())
}

/// Conjugate-symmetric evaluation over `m ≥ 0` only:
/// `Σₙ Σ_{m≥0} Re{(2 − δₘ₀) Aₘⁿ P̄ₙᵐ e^{imφ}}`.
///
/// Uses β̂ basis terms per point instead of β; exact for weights that
/// satisfy `A₋ₘ = (−1)ᵐ conj(Aₘ)`.
pub fn reconstruct_fast(weights: &FourierWeights, coords: &CurvilinearCoords) -> Result<Vec<Vec3>> {
    check_domain(weights, coords)?;
    let config = ExpansionConfig::new(weights.n_max())?;
    let n_max = config.n_max();
    let ev = BasisEvaluator::new(*weights.domain(), config);
    let q = weights.rows();
    Ok((0..coords.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; config.beta_hat()],
            |p, i| {
                ev.legendre(coords.eta()[i], p);
                let phi = coords.phi()[i];
                let mut out = Vec3::zeros();
                for m in 0..=n_max {
                    let mut s = [Complex64::default(); 3];
                    for n in m..=n_max {
                        let pv = p[tri_index(n, m)];
                        let w = &q[row_index(n, m as i64)];
                        for d in 0..3 {
                            s[d] += w[d] * pv;
                        }
                    }
                    let rot = Complex64::from_polar(if m == 0 { 1.0 } else { 2.0 }, m as f64 * phi);
                    for d in 0..3 {
                        out[d] += (s[d] * rot).re;
                    }
                }
                out
            },
        )
        .collect())
}
