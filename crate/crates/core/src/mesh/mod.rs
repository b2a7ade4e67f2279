//! Triangle meshes and planar contours.
//!
//! [`TriangleMesh`] is validated on construction: indices in range, no
//! repeated index inside a face, every edge shared by at most two faces with
//! opposite orientation, and at most one boundary loop.

mod distance;
mod generate;
mod io;
mod metrics;

use std::collections::HashMap;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

pub use distance::{compare_surfaces, SurfaceComparison};
pub use generate::{hex_disk, icosphere, MAX_REFINEMENTS};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh, MeshFormat};
pub use metrics::{
    area_density, detect_normal_flips, face_metrics, face_normals, mean_and_std, vertex_voronoi_areas, FaceMetrics,
    Histogram, QualityReport, DEGENERATE_RHO_HAT,
};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Indexed triangle surface with counterclockwise faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl TriangleMesh {
    /// Builds a mesh and checks its connectivity.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n_v = vertices.len();
        for (f, tri) in faces.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= n_v) {
                return Err(Error::Topology(format!(
                    "face {f} references vertex {bad} but the mesh has {n_v} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology(format!("face {f} repeats a vertex: {tri:?}")));
            }
        }
        let boundary = boundary_loop(&faces)?;
        Ok(Self {
            vertices,
            faces,
            boundary,
        })
    }

    /// Same connectivity, new vertex positions.
    ///
    /// # Panics
    /// If the vertex count differs.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count mismatch");
        Self {
            vertices,
            faces: self.faces.clone(),
            boundary: self.boundary.clone(),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn n_v(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_f(&self) -> usize {
        self.faces.len()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    /// Ordered boundary loop (empty for closed meshes), following face orientation.
    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary
    }

    pub fn face_vertices(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_f())
            .map(|f| {
                let [a, b, c] = self.face_vertices(f);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Unique undirected edges, each as (min, max).
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .faces
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|[a, b]| [a.min(b), a.max(b)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edges();
        if edges.is_empty() {
            return 0.0;
        }
        edges
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .sum::<f64>()
            / edges.len() as f64
    }

    /// Length of the boundary loop (0 for closed meshes).
    pub fn boundary_length(&self) -> f64 {
        let b = &self.boundary;
        (0..b.len())
            .map(|k| (self.vertices[b[(k + 1) % b.len()]] - self.vertices[b[k]]).norm())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_vertices(self.vertices.iter().map(|v| v * s).collect())
    }
}

fn boundary_loop(faces: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if let Some(g) = directed.insert(e, f) {
                return Err(Error::Topology(format!(
                    "directed edge {e:?} used by faces {g} and {f}: non-manifold edge or inconsistent orientation"
                )));
            }
        }
    }
    // Boundary half-edges have no twin; walk them into loops.
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) && next.insert(a, b).is_some() {
            return Err(Error::Topology(format!("vertex {a} is a non-manifold boundary vertex")));
        }
    }
    if next.is_empty() {
        return Ok(Vec::new());
    }
    let start = *next.keys().min().unwrap();
    let mut ring = vec![start];
    let mut v = next[&start];
    while v != start {
        if ring.len() > next.len() {
            return Err(Error::Topology("boundary walk did not close".into()));
        }
        ring.push(v);
        v = *next
            .get(&v)
            .ok_or_else(|| Error::Topology(format!("boundary broken at vertex {v}")))?;
    }
    if ring.len() != next.len() {
        return Err(Error::Topology(format!(
            "more than one boundary loop ({} boundary edges, first loop has {})",
            next.len(),
            ring.len()
        )));
    }
    Ok(ring)
}

/// Ordered planar polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour2D {
    points: Vec<Vec2>,
    closed: bool,
}

impl Contour2D {
    pub fn new(points: Vec<Vec2>, closed: bool) -> Result<Self> {
        if closed && points.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "closed contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        let n = points.len();
        let pairs = if closed { n } else { n.saturating_sub(1) };
        for k in 0..pairs {
            if points[k] == points[(k + 1) % n] {
                return Err(Error::InvalidInput(format!("repeated consecutive point at index {k}")));
            }
        }
        Ok(Self { points, closed })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.points.len();
        let pairs = if self.closed { n } else { n.saturating_sub(1) };
        (0..pairs)
            .map(|k| (self.points[(k + 1) % n] - self.points[k]).norm())
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn open_quad_has_one_loop() {
        let m = quad();
        assert!(!m.is_closed());
        assert_eq!(m.boundary_loop(), &[0, 1, 2, 3]);
        assert!((m.boundary_length() - 4.0).abs() < 1e-15);
        assert_eq!(m.edges().len(), 5);
    }

    #[test]
    fn rejects_flipped_neighbour() {
        let v = quad().vertices().to_vec();
        let err = TriangleMesh::new(v, vec![[0, 1, 2], [0, 3, 2]]).unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn rejects_two_loops() {
        let mut v = quad().vertices().to_vec();
        v.extend(v.clone().into_iter().map(|p| p + Vec3::new(5.0, 0.0, 0.0)));
        let err = TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]]).unwrap_err();
        assert!(err.to_string().contains("more than one boundary loop"));
    }

    #[test]
    fn rejects_bad_faces() {
        let v = quad().vertices().to_vec();
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 9]]).is_err());
        assert!(TriangleMesh::new(v, vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn contour_validation() {
        let p = |x, y| Vec2::new(x, y);
        assert!(Contour2D::new(vec![p(0., 0.), p(1., 0.)], true).is_err());
        assert!(Contour2D::new(vec![p(0., 0.), p(1., 0.), p(1., 0.)], true).is_err());
        let c = Contour2D::new(vec![p(0., 0.), p(1., 0.), p(0., 1.)], true).unwrap();
        assert!((c.length() - (2.0 + 2f64.sqrt())).abs() < 1e-15);
    }
}
