//! Sparse matrices and the implicit diffusion step.
//!
//! [`CsrMatrix`] is a plain compressed-sparse-row matrix. General systems
//! go through restarted GMRES with right preconditioning; the symmetric
//! positive definite backward-Euler system `(M − Δt L) u' = M u` uses
//! preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Rows above this count are multiplied in parallel.
const PARALLEL_ROWS: usize = 4096;

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    ///
    /// # Panics
    /// If an index is out of bounds.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) outside {n_rows}x{n_cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::from_triplets(
            d.len(),
            d.len(),
            d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        let row_dot = |i: usize| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum::<f64>()
        };
        if self.n_rows >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.n_cols,
            self.n_rows,
            self.triplets().map(|(i, j, v)| (j, i, v)).collect(),
        )
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// `scale · self + diag(d)`.
    pub fn scaled_plus_diagonal(&self, scale: f64, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n_rows);
        let mut t: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (i, j, scale * v)).collect();
        t.extend(d.iter().enumerate().map(|(i, &v)| (i, i, v)));
        Self::from_triplets(self.n_rows, self.n_cols, t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Text dump, one `row col value` triple per line.
    pub fn to_coo_text(&self) -> String {
        self.triplets().map(|(i, j, v)| format!("{i} {j} {v}\n")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
    SymmetricGaussSeidel,
}

#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 2000;
const RESTART: usize = 50;

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Result<Self> {
        if matrix.n_rows() != matrix.n_cols() || matrix.n_rows() != rhs.len() {
            return Err(Error::InvalidInput(format!(
                "system is {}x{} with a right-hand side of length {}",
                matrix.n_rows(),
                matrix.n_cols(),
                rhs.len()
            )));
        }
        Ok(Self {
            matrix,
            rhs,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Precond<'a> {
    kind: Preconditioner,
    a: &'a CsrMatrix,
    diag: Vec<f64>,
}

impl<'a> Precond<'a> {
    fn new(kind: Preconditioner, a: &'a CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if kind != Preconditioner::None {
            if let Some(i) = diag.iter().position(|&d| d == 0.0 || !d.is_finite()) {
                return Err(Error::Breakdown {
                    iterations: 0,
                    reason: format!("zero diagonal at row {i}; cannot build {kind:?} preconditioner"),
                });
            }
        }
        Ok(Self { kind, a, diag })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self.kind {
            Preconditioner::None => z.copy_from_slice(r),
            Preconditioner::Jacobi => {
                for i in 0..r.len() {
                    z[i] = r[i] / self.diag[i];
                }
            }
            Preconditioner::SymmetricGaussSeidel => {
                // (D + L) D⁻¹ (D + U) z = r
                let n = r.len();
                let mut y = vec![0.0; n];
                for i in 0..n {
                    let (c, v) = self.a.row(i);
                    let s: f64 = c.iter().zip(v).filter(|(&j, _)| j < i).map(|(&j, &a)| a * y[j]).sum();
                    y[i] = (r[i] - s) / self.diag[i];
                }
                for i in (0..n).rev() {
                    let (c, v) = self.a.row(i);
                    let s: f64 = c.iter().zip(v).filter(|(&j, _)| j > i).map(|(&j, &a)| a * z[j]).sum();
                    z[i] = y[i] - s / self.diag[i];
                }
            }
        }
    }
}

fn check_rows(a: &CsrMatrix) -> Result<()> {
    for i in 0..a.n_rows() {
        if a.row(i).1.iter().all(|&v| v == 0.0) {
            return Err(Error::Breakdown {
                iterations: 0,
                reason: format!("row {i} is identically zero (singular matrix)"),
            });
        }
    }
    Ok(())
}

/// Restarted GMRES with right preconditioning, started from `x = 0`.
pub fn solve_sparse(system: &SparseSystem, preconditioner: Preconditioner) -> Result<Solution> {
    gmres(system, preconditioner, None)
}

/// GMRES from an initial guess.
pub fn gmres(system: &SparseSystem, preconditioner: Preconditioner, x0: Option<&[f64]>) -> Result<Solution> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    check_rows(a)?;
    let pc = Precond::new(preconditioner, a)?;
    let b_norm = norm(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let tol = system.tolerance * b_norm;
    let mut iterations = 0;
    let mut tmp = vec![0.0; n];
    loop {
        a.mul_vec_into(&x, &mut tmp);
        let r: Vec<f64> = b.iter().zip(&tmp).map(|(b, ax)| b - ax).collect();
        let beta = norm(&r);
        if beta <= tol {
            return Ok(Solution {
                x,
                iterations,
                relative_residual: beta / b_norm,
            });
        }
        if iterations >= system.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                residual: beta / b_norm,
            });
        }
        let m = RESTART.min(system.max_iterations - iterations).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut z = vec![0.0; n];
        let mut k_done = 0;
        let mut breakdown = false;
        for k in 0..m {
            pc.apply(&v[k], &mut z);
            let mut w = a.mul_vec(&z);
            for (j, vj) in v.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= h[j][k] * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                breakdown = true;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_done = k + 1;
            if g[k + 1].abs() <= tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        if k_done == 0 {
            return Err(Error::Breakdown {
                iterations,
                reason: "Krylov space collapsed; matrix is singular on the residual".into(),
            });
        }
        // Back substitution and update x += M⁻¹ V y.
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let s: f64 = (i + 1..k_done).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, vj) in update.iter_mut().zip(&v[j]) {
                *u += yj * vj;
            }
        }
        pc.apply(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        if breakdown {
            a.mul_vec_into(&x, &mut tmp);
            let res = norm(&b.iter().zip(&tmp).map(|(b, ax)| b - ax).collect::<Vec<_>>());
            if res > tol {
                return Err(Error::Breakdown {
                    iterations,
                    reason: format!("Arnoldi breakdown with relative residual {:.3e}", res / b_norm),
                });
            }
        }
    }
}

/// Preconditioned conjugate gradients for symmetric positive definite systems.
pub fn conjugate_gradient(
    system: &SparseSystem,
    preconditioner: Preconditioner,
    x0: Option<&[f64]>,
) -> Result<Solution> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    check_rows(a)?;
    let pc = Precond::new(preconditioner, a)?;
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let tol = system.tolerance * b_norm;
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut r: Vec<f64> = b.iter().zip(a.mul_vec(&x)).map(|(b, ax)| b - ax).collect();
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..=system.max_iterations {
        let rn = norm(&r);
        if rn <= tol {
            return Ok(Solution {
                x,
                iterations: it,
                relative_residual: rn / b_norm,
            });
        }
        if it == system.max_iterations {
            return Err(Error::NotConverged {
                iterations: it,
                residual: rn / b_norm,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Breakdown {
                iterations: it,
                reason: format!("non-positive curvature pᵀAp = {pap:e}; matrix is not SPD"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}

/// System `(M − Δt L) u' = M u` of one implicit step.
pub fn backward_euler_system(vertex_mass: &[f64], laplacian: &CsrMatrix, u: &[f64], dt: f64) -> Result<SparseSystem> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if let Some(i) = vertex_mass.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::Degenerate(format!("vertex {i} has non-positive mass")));
    }
    let rhs = vertex_mass.iter().zip(u).map(|(m, u)| m * u).collect();
    SparseSystem::new(laplacian.scaled_plus_diagonal(-dt, vertex_mass), rhs)
}

/// One backward-Euler diffusion step, solved by Jacobi-preconditioned CG
/// warm-started at `u`.
pub fn backward_euler_step(vertex_mass: &[f64], laplacian: &CsrMatrix, u: &[f64], dt: f64) -> Result<Vec<f64>> {
    let system = backward_euler_system(vertex_mass, laplacian, u, dt)?;
    Ok(conjugate_gradient(&system, Preconditioner::Jacobi, Some(u))?.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtMode {
    Iso,
    /// Divides the isotropic step by the largest face diffusion rate.
    Aniso {
        alpha_max: f64,
    },
}

pub const DEFAULT_DT_SCALE: f64 = 0.5;

/// `Δt = c·h̄²` from the mean edge length `h̄`.
pub fn estimate_dt(mesh: &TriangleMesh, mode: DtMode, c: f64) -> f64 {
    let h = mesh.mean_edge_length();
    dt_from_edge(h, mode, c)
}

pub fn dt_from_edge(mean_edge: f64, mode: DtMode, c: f64) -> f64 {
    let iso = c * mean_edge * mean_edge;
    match mode {
        DtMode::Iso => iso,
        DtMode::Aniso { alpha_max } => iso / alpha_max.max(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![2.0, 3.0]);
        assert_eq!(m.transpose().get(2, 1), 1.5);
    }

    #[test]
    fn identity_one_iteration() {
        let b = vec![1.0, -2.0, 3.5];
        let s = SparseSystem::new(CsrMatrix::identity(3), b.clone()).unwrap();
        let sol = solve_sparse(&s, Preconditioner::None).unwrap();
        assert_eq!(sol.iterations, 1);
        for (x, b) in sol.x.iter().zip(&b) {
            assert!((x - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_against_dense() {
        let a = tridiag(100);
        let exact = a
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_element(100, 1.0))
            .unwrap();
        for pc in [
            Preconditioner::None,
            Preconditioner::Jacobi,
            Preconditioner::SymmetricGaussSeidel,
        ] {
            let s = SparseSystem::new(a.clone(), vec![1.0; 100]).unwrap();
            let g = solve_sparse(&s, pc).unwrap();
            let c = conjugate_gradient(&s, pc, None).unwrap();
            for i in 0..100 {
                assert!((g.x[i] - exact[i]).abs() < 1e-9 * exact.amax(), "gmres {pc:?}");
                assert!((c.x[i] - exact[i]).abs() < 1e-9 * exact.amax(), "cg {pc:?}");
            }
        }
    }

    #[test]
    fn zero_row_breaks_down() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 0.0)]);
        let s = SparseSystem::new(a, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_sparse(&s, Preconditioner::None),
            Err(Error::Breakdown { .. })
        ));
    }

    #[test]
    fn iteration_cap_reported() {
        let mut s = SparseSystem::new(tridiag(200), vec![1.0; 200]).unwrap();
        s.max_iterations = 5;
        assert!(matches!(
            solve_sparse(&s, Preconditioner::None),
            Err(Error::NotConverged { iterations: 5, .. })
        ));
    }

    #[test]
    fn no_diffusion_is_identity() {
        let l = CsrMatrix::from_triplets(3, 3, vec![]);
        let u = vec![0.1, 0.7, 0.2];
        assert_eq!(backward_euler_step(&[1.0, 2.0, 0.5], &l, &u, 0.3).unwrap(), u);
    }

    #[test]
    fn two_vertex_limit() {
        let l = CsrMatrix::from_triplets(2, 2, vec![(0, 0, -1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)]);
        let u = backward_euler_step(&[1.0, 1.0], &l, &[1.0, 0.0], 1e8).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-7 && (u[1] - 0.5).abs() < 1e-7);
        // Closed form: u0 = (1 + dt)/(1 + 2dt).
        let dt = 0.7;
        let u = backward_euler_step(&[1.0, 1.0], &l, &[1.0, 0.0], dt).unwrap();
        assert!((u[0] - (1.0 + dt) / (1.0 + 2.0 * dt)).abs() < 1e-12);
    }

    #[test]
    fn dt_formula() {
        assert!((dt_from_edge(0.1, DtMode::Iso, 0.5) - 0.005).abs() < 1e-15);
        assert!((dt_from_edge(0.1, DtMode::Aniso { alpha_max: 4.0 }, 0.5) - 0.00125).abs() < 1e-15);
    }
}
