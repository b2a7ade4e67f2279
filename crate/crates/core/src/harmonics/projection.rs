use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use super::alp::{alp_table, tri_index};
use super::decompose::decompose_points;
use super::{beta_hat, ExpansionConfig, FourierWeights};
use crate::error::Result;
use crate::mesh::Vec3;
use crate::spheroidal::{CurvilinearCoords, DomainKind, SpheroidDomain};

/// Distance in η between the fitting grid and the true rim of a
/// hemispheroid, where every `m ≠ 0` basis function vanishes.
const RIM_GAP: f64 = 1e-3;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Expansion weights of a shell function `f(η, φ)` by quadrature.
///
/// Gauss–Legendre in ξ times the trapezoidal rule in φ; on prolate
/// hemispheroids, where ξ only spans `[0, 1]` and the basis is not
/// orthogonal, the same grid feeds a least-squares fit instead.
pub fn project_function<F>(domain: &SpheroidDomain, n_max: usize, f: F) -> Result<FourierWeights>
where
    F: Fn(f64, f64) -> Vec3 + Sync,
{
    let config = ExpansionConfig::new(n_max)?;
    let (xi_lo, xi_hi) = domain.xi_range();
    let n_xi = 2 * n_max + 24;
    let n_phi = 4 * n_max + 24;
    let (nodes, gl_w) = gauss_legendre(n_xi);
    let xis: Vec<f64> = nodes
        .iter()
        .map(|t| xi_lo + (t + 1.0) * (xi_hi - xi_lo) / 2.0)
        .collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();

    if (xi_lo, xi_hi) != (-1.0, 1.0) {
        let (lo, hi) = domain.eta_range();
        let (lo, hi) = match domain.kind {
            DomainKind::ProlateHemispheroid => (lo, hi - RIM_GAP),
            _ => (lo + RIM_GAP, hi),
        };
        let etas: Vec<f64> = (0..n_xi)
            .map(|k| lo + (hi - lo) * k as f64 / (n_xi - 1) as f64)
            .collect();
        let (eta, phi): (Vec<f64>, Vec<f64>) = etas.iter().flat_map(|&e| phis.iter().map(move |&p| (e, p))).unzip();
        let coords = CurvilinearCoords::new(*domain, eta, phi)?;
        let points: Vec<Vec3> = coords.eta().iter().zip(coords.phi()).map(|(&e, &p)| f(e, p)).collect();
        return Ok(decompose_points(&points, &coords, config)?.weights);
    }

    // Per latitude: discrete Fourier coefficients, then Legendre-weighted sum.
    let rings: Vec<Vec<[Complex64; 3]>> = xis
        .par_iter()
        .map(|&x| {
            let eta = domain.eta_of_xi(x);
            let vals: Vec<Vec3> = phis.iter().map(|&p| f(eta, p)).collect();
            (0..=n_max)
                .map(|m| {
                    let mut acc = [Complex64::default(); 3];
                    for (v, &p) in vals.iter().zip(&phis) {
                        let rot = Complex64::from_polar(1.0, -(m as f64) * p);
                        for d in 0..3 {
                            acc[d] += rot * v[d];
                        }
                    }
                    acc.map(|a| a * (TAU / n_phi as f64))
                })
                .collect()
        })
        .collect();
    let mut weights = FourierWeights::zeros(*domain, n_max)?;
    let mut table = vec![0.0; beta_hat(n_max)];
    let mut acc = vec![[Complex64::default(); 3]; beta_hat(n_max)];
    for (k, &x) in xis.iter().enumerate() {
        alp_table(n_max, x, &mut table);
        for n in 0..=n_max {
            for m in 0..=n {
                let t = tri_index(n, m);
                for d in 0..3 {
                    acc[t][d] += rings[k][m][d] * (gl_w[k] * table[t]);
                }
            }
        }
    }
    for n in 0..=n_max {
        for m in 0..=n {
            let a = acc[tri_index(n, m)];
            weights.set(n, m as i64, a);
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                weights.set(n, -(m as i64), a.map(|c| c.conj() * sign));
            }
        }
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            // Exact up to degree 2n−1.
            let deg = 2 * n - 2;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((integral - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }
}
