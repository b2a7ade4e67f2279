use std::collections::HashMap;
use std::f64::consts::PI;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// Largest accepted icosphere refinement (10·4⁸+2 ≈ 655k vertices).
pub const MAX_REFINEMENTS: usize = 8;

/// Unit-sphere geodesic polyhedron: `refinements` midpoint subdivisions of
/// the icosahedron, new vertices projected onto the sphere.
pub fn icosphere(refinements: usize) -> Result<TriangleMesh> {
    if refinements > MAX_REFINEMENTS {
        return Err(Error::Guard {
            what: "icosphere refinement",
            value: refinements,
            limit: MAX_REFINEMENTS,
        });
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..refinements {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 2);
        let mut split = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = split(a, b, &mut vertices);
            let bc = split(b, c, &mut vertices);
            let ca = split(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces)
}

/// Planar unit disk built from `rings` concentric rings around a center
/// vertex; ring k holds 6k vertices at radius k/rings. Consecutive rings are
/// stitched by angle order, giving 1+3K(K+1) vertices and 6K² faces, all
/// counterclockwise seen from +z. The outer ring is the boundary loop.
pub fn hex_disk(rings: usize) -> Result<TriangleMesh> {
    if rings == 0 {
        return Err(Error::InvalidInput("hex_disk needs at least one ring".into()));
    }
    if rings > 512 {
        return Err(Error::Guard {
            what: "disk ring count",
            value: rings,
            limit: 512,
        });
    }
    let mut vertices = vec![Vec3::zeros()];
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        for j in 0..6 * k {
            let a = 2.0 * PI * j as f64 / (6 * k) as f64;
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let mut faces = Vec::with_capacity(6 * rings * rings);
    for j in 0..6 {
        faces.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for k in 2..=rings {
        let (inner, n_in) = (ring_start(k - 1), 6 * (k - 1));
        let (outer, n_out) = (ring_start(k), 6 * k);
        // Merge the two angle sequences; every step advances one ring.
        let (mut i, mut o) = (0usize, 0usize);
        while i < n_in || o < n_out {
            let ai = (i as f64 + 0.5) / n_in as f64;
            let ao = (o as f64 + 0.5) / n_out as f64;
            if o < n_out && (i == n_in || ao <= ai) {
                faces.push([inner + i % n_in, outer + o, outer + (o + 1) % n_out]);
                o += 1;
            } else {
                faces.push([inner + i, outer + o % n_out, inner + (i + 1) % n_in]);
                i += 1;
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for r in 0..=4 {
            let m = icosphere(r).unwrap();
            assert_eq!(m.n_v(), 10 * 4usize.pow(r as u32) + 2);
            assert_eq!(m.n_f(), 20 * 4usize.pow(r as u32));
            assert!(m.is_closed());
            for v in m.vertices() {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn icosphere_outward() {
        let m = icosphere(1).unwrap();
        for f in 0..m.n_f() {
            let [a, b, c] = m.face_vertices(f);
            assert!((b - a).cross(&(c - a)).dot(&(a + b + c)) > 0.0);
        }
    }

    #[test]
    fn icosphere_guard() {
        assert!(matches!(icosphere(9), Err(Error::Guard { .. })));
    }

    #[test]
    fn disk_counts_and_orientation() {
        for k in 1..=6 {
            let m = hex_disk(k).unwrap();
            assert_eq!(m.n_v(), 1 + 3 * k * (k + 1));
            assert_eq!(m.n_f(), 6 * k * k);
            assert_eq!(m.boundary_loop().len(), 6 * k);
            assert!((m.total_area() - PI).abs() < 0.6 / k as f64);
            for f in 0..m.n_f() {
                let [a, b, c] = m.face_vertices(f);
                assert!((b - a).cross(&(c - a)).z > 0.0, "face {f} of ring {k}");
            }
        }
    }
}
