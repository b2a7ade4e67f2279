//! Piecewise-linear differential operators on triangle meshes.
//!
//! The Laplacians are assembled as `L = −Gᵀ D A G` from per-face gradients
//! of the hat functions; with `D = I` this is the cotangent Laplacian.

use nalgebra::{Matrix3, Matrix3x2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{vertex_voronoi_areas, TriangleMesh, Vec3};
use crate::solver::CsrMatrix;

/// Cap on the fast diffusion rate `α₂`.
pub const DEFAULT_ALPHA_CAP: f64 = 1e4;

/// Faces with `λ₂/λ₁` below this count as collapsed.
pub const COLLAPSE_RATIO: f64 = 1e-8;

/// Per-face Cartesian gradient of piecewise-linear vertex functions.
#[derive(Debug, Clone)]
pub struct GradientOperator {
    /// `3 n_f × n_v`, rows `3f..3f+3` hold face `f`.
    pub matrix: CsrMatrix,
}

impl GradientOperator {
    pub fn face_gradients(&self, u: &[f64]) -> Vec<Vec3> {
        self.matrix
            .mul_vec(u)
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect()
    }
}

/// Diagonal face mass, each face area repeated for the three components.
#[derive(Debug, Clone)]
pub struct FaceMass {
    pub diagonal: Vec<f64>,
}

/// Lumped vertex mass from mixed Voronoi areas.
#[derive(Debug, Clone)]
pub struct VertexMass {
    pub diagonal: Vec<f64>,
}

impl VertexMass {
    pub fn total(&self) -> f64 {
        self.diagonal.iter().sum()
    }
}

/// Hat-function gradients of one face together with its area.
fn hat_gradients(p: &[Vec3; 3]) -> Option<([Vec3; 3], f64)> {
    let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let twice_area = cross.norm();
    let scale = (p[1] - p[0]).norm_squared().max((p[2] - p[0]).norm_squared());
    if !(twice_area > 1e-14 * scale) {
        return None;
    }
    let n = cross / twice_area;
    let g = std::array::from_fn(|i| n.cross(&(p[(i + 2) % 3] - p[(i + 1) % 3])) / twice_area);
    Some((g, twice_area / 2.0))
}

fn degenerate(f: usize) -> Error {
    Error::Degenerate(format!("face {f} has zero area"))
}

fn all_hat_gradients(mesh: &TriangleMesh) -> Result<Vec<([Vec3; 3], f64)>> {
    (0..mesh.n_f())
        .into_par_iter()
        .map(|f| hat_gradients(&mesh.face_vertices(f)).ok_or_else(|| degenerate(f)))
        .collect()
}

pub fn gradient_operator(mesh: &TriangleMesh) -> Result<GradientOperator> {
    let grads = all_hat_gradients(mesh)?;
    let mut t = Vec::with_capacity(9 * mesh.n_f());
    for (f, (g, _)) in grads.iter().enumerate() {
        for (k, &v) in mesh.faces()[f].iter().enumerate() {
            for d in 0..3 {
                t.push((3 * f + d, v, g[k][d]));
            }
        }
    }
    Ok(GradientOperator {
        matrix: CsrMatrix::from_triplets(3 * mesh.n_f(), mesh.n_v(), t),
    })
}

pub fn face_mass(mesh: &TriangleMesh) -> Result<FaceMass> {
    let grads = all_hat_gradients(mesh)?;
    Ok(FaceMass {
        diagonal: grads.iter().flat_map(|(_, a)| [*a; 3]).collect(),
    })
}

pub fn vertex_mass(mesh: &TriangleMesh) -> Result<VertexMass> {
    let diagonal = vertex_voronoi_areas(mesh);
    if let Some(i) = diagonal.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::Degenerate(format!("vertex {i} has no surrounding area")));
    }
    Ok(VertexMass { diagonal })
}

/// Area-weighted average of face vectors onto their vertices.
pub fn vertex_average(mesh: &TriangleMesh, face_values: &[Vec3]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); mesh.n_v()];
    let mut w = vec![0.0; mesh.n_v()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let p = mesh.face_vertices(f);
        let a = (p[1] - p[0]).cross(&(p[2] - p[0])).norm() / 2.0;
        for &v in tri {
            acc[v] += face_values[f] * a;
            w[v] += a;
        }
    }
    acc.iter()
        .zip(&w)
        .map(|(g, &w)| if w > 0.0 { g / w } else { *g })
        .collect()
}

/// `−Σ_f A_f ∇φᵢᵀ D_f ∇φⱼ`, with `D_f = I` when `tensors` is `None`.
///
/// Off-diagonals are computed once per face edge and the diagonal is their
/// negated sum, so rows sum to zero up to round-off and the matrix is
/// exactly symmetric.
fn assemble(mesh: &TriangleMesh, tensors: Option<&[Matrix3<f64>]>) -> Result<CsrMatrix> {
    let grads = all_hat_gradients(mesh)?;
    let per_face: Vec<[(usize, usize, f64); 9]> = grads
        .par_iter()
        .enumerate()
        .map(|(f, (g, area))| {
            let tri = mesh.faces()[f];
            let k = |i: usize, j: usize| match tensors {
                None => area * g[i].dot(&g[j]),
                Some(d) => area * g[i].dot(&(d[f] * g[j])),
            };
            let (k01, k12, k20) = (k(0, 1), k(1, 2), k(2, 0));
            [
                (tri[0], tri[1], -k01),
                (tri[1], tri[0], -k01),
                (tri[1], tri[2], -k12),
                (tri[2], tri[1], -k12),
                (tri[2], tri[0], -k20),
                (tri[0], tri[2], -k20),
                (tri[0], tri[0], k01 + k20),
                (tri[1], tri[1], k01 + k12),
                (tri[2], tri[2], k12 + k20),
            ]
        })
        .collect();
    let t = per_face.into_iter().flatten().collect();
    Ok(CsrMatrix::from_triplets(mesh.n_v(), mesh.n_v(), t))
}

/// Cotangent Laplace–Beltrami operator, `−Gᵀ A G`.
pub fn laplacian_iso(mesh: &TriangleMesh) -> Result<CsrMatrix> {
    assemble(mesh, None)
}

/// Anisotropic operator `−Gᵀ D A G` with directors from the mesh's own faces.
pub fn laplacian_aniso(mesh: &TriangleMesh, gamma: f64) -> Result<CsrMatrix> {
    let field = DiffusionTensorField::from_mesh(mesh, gamma, DEFAULT_ALPHA_CAP)?;
    assemble(mesh, Some(&field.tensors))
}

/// Anisotropic operator with externally supplied per-face tensors.
pub fn laplacian_with_tensors(mesh: &TriangleMesh, tensors: &[Matrix3<f64>]) -> Result<CsrMatrix> {
    if tensors.len() != mesh.n_f() {
        return Err(Error::InvalidInput(format!(
            "{} tensors for {} faces",
            tensors.len(),
            mesh.n_f()
        )));
    }
    assemble(mesh, Some(tensors))
}

/// Rotation by +π/2 about a unit axis, `I + N̄ + N̄²`.
pub fn rodrigues_quarter_turn(normal: &Vec3) -> Result<Matrix3<f64>> {
    if (normal.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("axis has length {}", normal.norm())));
    }
    let n = normal.cross_matrix();
    Ok(Matrix3::identity() + n + n * n)
}

/// Principal directions and diffusion rates of one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceDirectors {
    /// Long principal direction.
    pub v1: Vec3,
    pub v2: Vec3,
    /// Unit normal, oriented with the vertex winding.
    pub normal: Vec3,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl FaceDirectors {
    pub fn aspect_ratio(&self) -> f64 {
        self.lambda2 / self.lambda1
    }

    /// `α₁ v₁⊥v₁⊥ᵀ + α₂ v₂⊥v₂⊥ᵀ + n nᵀ` with `v⊥` the quarter-turned director.
    pub fn tensor(&self) -> Matrix3<f64> {
        tensor_from(&self.v1, &self.normal, self.alpha1, self.alpha2)
    }
}

fn tensor_from(v1: &Vec3, n: &Vec3, alpha1: f64, alpha2: f64) -> Matrix3<f64> {
    let t1 = n.cross(v1);
    let t2 = n.cross(&n.cross(v1));
    t1 * t1.transpose() * alpha1 + t2 * t2.transpose() * alpha2 + n * n.transpose()
}

/// Rates from the singular values: `α₁ = exp((1 − λ₁/λ₂)/γ)` (slow) and
/// `α₂ = exp((1 − λ₂/λ₁)·γ)` (fast), both clamped to `[1/α_cap, α_cap]`.
pub fn diffusion_rates(lambda1: f64, lambda2: f64, gamma: f64, alpha_cap: f64) -> (f64, f64) {
    let ln_cap = alpha_cap.ln();
    let a1 = ((1.0 - lambda1 / lambda2) / gamma).max(-ln_cap).exp();
    let a2 = ((1.0 - lambda2 / lambda1) * gamma).min(ln_cap).exp();
    (a1, a2)
}

pub fn face_directors(face: &[Vec3; 3], gamma: f64) -> Result<FaceDirectors> {
    face_directors_capped(face, gamma, DEFAULT_ALPHA_CAP)
}

/// Directors from the SVD of the centroid-centred vertex matrix.
pub fn face_directors_capped(face: &[Vec3; 3], gamma: f64, alpha_cap: f64) -> Result<FaceDirectors> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "anisotropy strength must be positive, got {gamma}"
        )));
    }
    if !(alpha_cap >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha cap must be at least 1, got {alpha_cap}"
        )));
    }
    let c = (face[0] + face[1] + face[2]) / 3.0;
    let m = Matrix3::from_rows(&[
        (face[0] - c).transpose(),
        (face[1] - c).transpose(),
        (face[2] - c).transpose(),
    ]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let s = svd.singular_values;
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let (lambda1, lambda2) = (s[order[0]], s[order[1]]);
    if !(lambda1 > 0.0) || lambda2 / lambda1 < COLLAPSE_RATIO {
        return Err(Error::Degenerate(format!(
            "collapsed face (singular values {lambda1:e}, {lambda2:e})"
        )));
    }
    let v1: Vec3 = vt.row(order[0]).transpose();
    let v2: Vec3 = vt.row(order[1]).transpose();
    let mut normal = v1.cross(&v2).normalize();
    if normal.dot(&(face[1] - face[0]).cross(&(face[2] - face[0]))) < 0.0 {
        normal = -normal;
    }
    let (alpha1, alpha2) = diffusion_rates(lambda1, lambda2, gamma, alpha_cap);
    Ok(FaceDirectors {
        v1,
        v2,
        normal,
        lambda1,
        lambda2,
        alpha1,
        alpha2,
    })
}

/// Directors and tensors of every face of one mesh.
#[derive(Debug, Clone)]
pub struct DiffusionTensorField {
    pub directors: Vec<FaceDirectors>,
    pub tensors: Vec<Matrix3<f64>>,
}

impl DiffusionTensorField {
    pub fn from_mesh(mesh: &TriangleMesh, gamma: f64, alpha_cap: f64) -> Result<Self> {
        let directors: Vec<FaceDirectors> = (0..mesh.n_f())
            .into_par_iter()
            .map(|f| {
                face_directors_capped(&mesh.face_vertices(f), gamma, alpha_cap).map_err(|e| match e {
                    Error::Degenerate(m) => Error::Degenerate(format!("face {f}: {m}")),
                    e => e,
                })
            })
            .collect::<Result<_>>()?;
        let tensors = directors.iter().map(FaceDirectors::tensor).collect();
        Ok(Self { directors, tensors })
    }

    /// Largest rate over all faces.
    pub fn max_rate(&self) -> f64 {
        self.directors
            .iter()
            .map(|d| d.alpha1.max(d.alpha2))
            .fold(1.0, f64::max)
    }

    /// Tensors expressed on a second mesh with the same connectivity.
    ///
    /// Each long director is carried through the affine map between the two
    /// copies of the face and re-orthonormalised in the target face plane;
    /// the rates are kept.
    pub fn transported(&self, source: &TriangleMesh, target: &TriangleMesh) -> Result<Vec<Matrix3<f64>>> {
        if source.faces() != target.faces() || self.directors.len() != source.n_f() {
            return Err(Error::InvalidInput("meshes do not share connectivity".into()));
        }
        (0..target.n_f())
            .into_par_iter()
            .map(|f| {
                let (s, t) = (source.face_vertices(f), target.face_vertices(f));
                let es = Matrix3x2::from_columns(&[s[1] - s[0], s[2] - s[0]]);
                let et = Matrix3x2::from_columns(&[t[1] - t[0], t[2] - t[0]]);
                let gram = (es.transpose() * es).try_inverse().ok_or_else(|| degenerate(f))?;
                let d = &self.directors[f];
                let cross = (t[1] - t[0]).cross(&(t[2] - t[0]));
                let n = cross.try_normalize(0.0).ok_or_else(|| degenerate(f))?;
                let mut v1 = et * (gram * (es.transpose() * d.v1));
                v1 -= n * n.dot(&v1);
                let v1 = v1.try_normalize(0.0).ok_or_else(|| degenerate(f))?;
                Ok(tensor_from(&v1, &n, d.alpha1, d.alpha2))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> [Vec3; 3] {
        [
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
        ]
    }

    #[test]
    fn equilateral_is_isotropic() {
        let d = face_directors(&equilateral(), 250.0).unwrap();
        assert!((d.lambda1 - d.lambda2).abs() < 1e-12);
        assert!((d.alpha1 - 1.0).abs() < 1e-9 && (d.alpha2 - 1.0).abs() < 1e-9);
        assert!((d.tensor() - Matrix3::identity()).amax() < 1e-9);
        assert!((d.normal - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let (a1, a2) = diffusion_rates(2.0, 1.0, 1.0, DEFAULT_ALPHA_CAP);
        assert!((a1 - (-1f64).exp()).abs() < 1e-15 && (a2 - 0.5f64.exp()).abs() < 1e-15);
        let (_, a2) = diffusion_rates(2.0, 1.0, 250.0, DEFAULT_ALPHA_CAP);
        assert!((a2 - DEFAULT_ALPHA_CAP).abs() < 1e-9);
    }

    #[test]
    fn quarter_turn() {
        let r = rodrigues_quarter_turn(&Vec3::z()).unwrap();
        assert!((r * Vec3::x() - Vec3::y()).norm() < 1e-15);
        assert!((r * r * r * r - Matrix3::identity()).amax() < 1e-12);
        assert!(rodrigues_quarter_turn(&Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn collapsed_face() {
        let f = [Vec3::zeros(), Vec3::x(), Vec3::new(2.0, 1e-12, 0.0)];
        assert!(matches!(face_directors(&f, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn single_triangle_cotangent_weight() {
        let m = TriangleMesh::new(equilateral().to_vec(), vec![[0, 1, 2]]).unwrap();
        let l = laplacian_iso(&m).unwrap();
        let w = 1.0 / (2.0 * 3f64.sqrt());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -2.0 * w } else { w };
                assert!((l.get(i, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn transport_to_self_is_identity() {
        let p = vec![Vec3::zeros(), Vec3::new(3.0, 0.2, 0.0), Vec3::new(0.4, 1.0, 0.3)];
        let m = TriangleMesh::new(p, vec![[0, 1, 2]]).unwrap();
        let field = DiffusionTensorField::from_mesh(&m, 5.0, DEFAULT_ALPHA_CAP).unwrap();
        let t = field.transported(&m, &m).unwrap();
        assert!((t[0] - field.tensors[0]).amax() < 1e-9);
    }
}
