use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::alp::tri_index;
use super::basis::{reconstruct_fast, BasisEvaluator};
use super::{row_index, ExpansionConfig, FourierWeights};
use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::spheroidal::{fit_domain, map_to_domain, CurvilinearCoords, DomainKind};

/// Basis sizes up to this use a dense QR factorization; larger systems use
/// matrix-free CGLS.
pub const DENSE_LIMIT: usize = 3000;

/// Condition estimate (ratio of extreme `|Rᵢᵢ|`) above which the system is
/// reported as rank deficient.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub weights: FourierWeights,
    /// Root-mean-square distance between the input vertices and their
    /// reconstruction.
    pub residual_rms: f64,
    /// Ratio of the largest to the smallest `|Rᵢᵢ|` (dense path) or 1 (CGLS).
    pub condition_estimate: f64,
}

/// Least-squares fit of the vertex positions on the harmonic basis.
pub fn decompose(mesh: &TriangleMesh, coords: &CurvilinearCoords, config: ExpansionConfig) -> Result<Decomposition> {
    if mesh.n_v() != coords.len() {
        return Err(Error::InvalidInput(format!(
            "{} vertices but {} coordinates",
            mesh.n_v(),
            coords.len()
        )));
    }
    decompose_points(mesh.vertices(), coords, config)
}

/// Fits a shell to `mesh`, maps the mesh onto it and decomposes.
///
/// The returned weights carry the fitted frame, so their reconstruction is
/// in world coordinates once passed through `weights.frame`.
pub fn fit_and_decompose(mesh: &TriangleMesh, n_max: usize, kind_hint: Option<DomainKind>) -> Result<Decomposition> {
    let config = ExpansionConfig::new(n_max)?;
    let fit = fit_domain(mesh, kind_hint)?;
    let local = fit.local_mesh(mesh);
    let coords = map_to_domain(&local, &fit.domain)?;
    let mut dec = decompose(&local, &coords, config)?;
    dec.weights.frame = fit.frame;
    Ok(dec)
}

/// Same as [`decompose`] for a bare point list.
pub fn decompose_points(points: &[Vec3], coords: &CurvilinearCoords, config: ExpansionConfig) -> Result<Decomposition> {
    decompose_with_limit(points, coords, config, DENSE_LIMIT)
}

pub(crate) fn decompose_with_limit(
    points: &[Vec3],
    coords: &CurvilinearCoords,
    config: ExpansionConfig,
    dense_limit: usize,
) -> Result<Decomposition> {
    let (rows, unknowns) = (points.len(), config.beta());
    if rows < unknowns {
        return Err(Error::Underdetermined { rows, unknowns });
    }
    let basis = RealBasis::new(coords, config);
    let (coef, condition_estimate) = if unknowns <= dense_limit {
        solve_dense(&basis, points)?
    } else {
        (solve_cgls(&basis, points)?, 1.0)
    };
    let weights = complex_weights(coords, config, &coef)?;
    let recon = reconstruct_fast(&weights, coords)?;
    let sq: f64 = recon.iter().zip(points).map(|(r, p)| (r - p).norm_squared()).sum();
    Ok(Decomposition {
        weights,
        residual_rms: (sq / rows as f64).sqrt(),
        condition_estimate,
    })
}

/// Real basis `P̄ₙᵐ cos(mφ)` (column of `(n, m)`) and `P̄ₙᵐ sin(mφ)` (column
/// of `(n, −m)`), spanning the same space as the complex basis for real data.
struct RealBasis<'a> {
    coords: &'a CurvilinearCoords,
    eval: BasisEvaluator,
    beta: usize,
}

impl<'a> RealBasis<'a> {
    fn new(coords: &'a CurvilinearCoords, config: ExpansionConfig) -> Self {
        Self {
            coords,
            eval: BasisEvaluator::new(*coords.domain(), config),
            beta: config.beta(),
        }
    }

    fn row(&self, i: usize, p: &mut [f64], out: &mut [f64]) {
        self.eval.legendre(self.coords.eta()[i], p);
        let phi = self.coords.phi()[i];
        let n_max = self.eval.n_max();
        for m in 0..=n_max {
            let (s, c) = (m as f64 * phi).sin_cos();
            for n in m..=n_max {
                let v = p[tri_index(n, m)];
                if m == 0 {
                    out[row_index(n, 0)] = v;
                } else {
                    out[row_index(n, m as i64)] = v * c;
                    out[row_index(n, -(m as i64))] = v * s;
                }
            }
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let n_rows = self.coords.len();
        let rows: Vec<Vec<f64>> = (0..n_rows)
            .into_par_iter()
            .map_init(
                || vec![0.0; super::beta_hat(self.eval.n_max())],
                |p, i| {
                    let mut r = vec![0.0; self.beta];
                    self.row(i, p, &mut r);
                    r
                },
            )
            .collect();
        DMatrix::from_fn(n_rows, self.beta, |i, j| rows[i][j])
    }

    /// `B x` for three right-hand sides at once.
    fn apply(&self, x: &[[f64; 3]]) -> Vec<[f64; 3]> {
        (0..self.coords.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; super::beta_hat(self.eval.n_max())], vec![0.0; self.beta]),
                |(p, r), i| {
                    self.row(i, p, r);
                    let mut acc = [0.0; 3];
                    for (bv, xv) in r.iter().zip(x) {
                        for d in 0..3 {
                            acc[d] += bv * xv[d];
                        }
                    }
                    acc
                },
            )
            .collect()
    }

    /// `Bᵀ y` for three right-hand sides.
    fn apply_t(&self, y: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let zero = || vec![[0.0; 3]; self.beta];
        (0..self.coords.len())
            .into_par_iter()
            .fold(
                || {
                    (
                        zero(),
                        vec![0.0; super::beta_hat(self.eval.n_max())],
                        vec![0.0; self.beta],
                    )
                },
                |(mut acc, mut p, mut r), i| {
                    self.row(i, &mut p, &mut r);
                    for (a, bv) in acc.iter_mut().zip(&r) {
                        for d in 0..3 {
                            a[d] += bv * y[i][d];
                        }
                    }
                    (acc, p, r)
                },
            )
            .map(|(acc, _, _)| acc)
            .reduce(zero, |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    for d in 0..3 {
                        x[d] += y[d];
                    }
                }
                a
            })
    }
}

fn solve_dense(basis: &RealBasis, points: &[Vec3]) -> Result<(Vec<[f64; 3]>, f64)> {
    let b = basis.dense();
    let beta = basis.beta;
    let qr = b.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..beta).map(|i| r[(i, i)].abs()).collect();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let mut rhs = DMatrix::from_fn(points.len(), 3, |i, d| points[i][d]);
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, beta).into_owned();
    let x = r
        .solve_upper_triangular(&top)
        .ok_or(Error::RankDeficient { condition })?;
    Ok((
        (0..beta).map(|j| [x[(j, 0)], x[(j, 1)], x[(j, 2)]]).collect(),
        condition,
    ))
}

/// Conjugate gradients on the normal equations (CGLS), one system per column.
fn solve_cgls(basis: &RealBasis, points: &[Vec3]) -> Result<Vec<[f64; 3]>> {
    const TOL: f64 = 1e-12;
    let max_iter = 20 * basis.beta;
    let beta = basis.beta;
    let mut x = vec![[0.0; 3]; beta];
    let mut r: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
    let mut s = basis.apply_t(&r);
    let mut p = s.clone();
    let norm2 = |v: &[[f64; 3]], d: usize| v.iter().map(|e| e[d] * e[d]).sum::<f64>();
    let mut gamma: [f64; 3] = std::array::from_fn(|d| norm2(&s, d));
    let gamma0 = gamma;
    let mut done = [false; 3];
    for d in 0..3 {
        done[d] = gamma0[d] == 0.0;
    }
    for _ in 0..max_iter {
        if done.iter().all(|&d| d) {
            return Ok(x);
        }
        let q = basis.apply(&p);
        for d in 0..3 {
            if done[d] {
                continue;
            }
            let alpha = gamma[d] / norm2(&q, d);
            for j in 0..beta {
                x[j][d] += alpha * p[j][d];
            }
            for i in 0..r.len() {
                r[i][d] -= alpha * q[i][d];
            }
        }
        s = basis.apply_t(&r);
        for d in 0..3 {
            if done[d] {
                continue;
            }
            let g = norm2(&s, d);
            if g <= TOL * TOL * gamma0[d] {
                done[d] = true;
                continue;
            }
            let ratio = g / gamma[d];
            gamma[d] = g;
            for j in 0..beta {
                p[j][d] = s[j][d] + ratio * p[j][d];
            }
        }
    }
    if done.iter().all(|&d| d) {
        return Ok(x);
    }
    let worst = (0..3)
        .filter(|&d| !done[d])
        .map(|d| (gamma[d] / gamma0[d]).sqrt())
        .fold(0.0, f64::max);
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: worst,
    })
}

/// Converts real cos/sin coefficients to conjugate-symmetric complex weights.
fn complex_weights(coords: &CurvilinearCoords, config: ExpansionConfig, coef: &[[f64; 3]]) -> Result<FourierWeights> {
    let mut w = FourierWeights::zeros(*coords.domain(), config.n_max())?;
    for n in 0..=config.n_max() {
        w.set(n, 0, coef[row_index(n, 0)].map(|a| Complex64::new(a, 0.0)));
        for m in 1..=n as i64 {
            let (a, b) = (coef[row_index(n, m)], coef[row_index(n, -m)]);
            let pos: [Complex64; 3] = std::array::from_fn(|d| Complex64::new(a[d] / 2.0, -b[d] / 2.0));
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            w.set(n, m, pos);
            w.set(n, -m, pos.map(|c| c.conj() * sign));
        }
    }
    Ok(w)
}
