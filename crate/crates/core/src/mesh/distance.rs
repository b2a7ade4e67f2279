use rayon::prelude::*;

use super::{TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceComparison {
    /// Mean of the two directed vertex-to-surface averages.
    pub mean_nearest_distance: f64,
    pub total_area_a: f64,
    pub total_area_b: f64,
}

/// Symmetric mean distance from the vertices of each mesh to the other surface.
pub fn compare_surfaces(a: &TriangleMesh, b: &TriangleMesh) -> SurfaceComparison {
    let d_ab = mean_distance_to(a.vertices(), &Bvh::new(b));
    let d_ba = mean_distance_to(b.vertices(), &Bvh::new(a));
    SurfaceComparison {
        mean_nearest_distance: 0.5 * (d_ab + d_ba),
        total_area_a: a.total_area(),
        total_area_b: b.total_area(),
    }
}

fn mean_distance_to(points: &[Vec3], bvh: &Bvh) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let sum: f64 = points.par_iter().map(|p| bvh.nearest_sq(p).sqrt()).sum();
    sum / points.len() as f64
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn dist_sq(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

enum Node {
    Leaf { bounds: Aabb, tris: Vec<[Vec3; 3]> },
    Inner { bounds: Aabb, kids: Box<[Node; 2]> },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

struct Bvh {
    root: Option<Node>,
}

const LEAF_SIZE: usize = 8;

impl Bvh {
    fn new(mesh: &TriangleMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.n_f()).map(|f| mesh.face_vertices(f)).collect();
        Self {
            root: (!tris.is_empty()).then(|| build(tris)),
        }
    }

    fn nearest_sq(&self, p: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if let Some(root) = &self.root {
            search(root, p, &mut best);
        }
        best
    }
}

fn build(mut tris: Vec<[Vec3; 3]>) -> Node {
    let mut bounds = Aabb::empty();
    for t in &tris {
        t.iter().for_each(|p| bounds.grow(p));
    }
    if tris.len() <= LEAF_SIZE {
        return Node::Leaf { bounds, tris };
    }
    let axis = (bounds.hi - bounds.lo).imax();
    let mid = tris.len() / 2;
    let key = |t: &[Vec3; 3]| t[0][axis] + t[1][axis] + t[2][axis];
    tris.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
    let right = tris.split_off(mid);
    Node::Inner {
        bounds,
        kids: Box::new([build(tris), build(right)]),
    }
}

fn search(node: &Node, p: &Vec3, best: &mut f64) {
    match node {
        Node::Leaf { tris, .. } => {
            for t in tris {
                *best = best.min((closest_point_on_triangle(p, t) - p).norm_squared());
            }
        }
        Node::Inner { kids, .. } => {
            let d: [f64; 2] = [kids[0].bounds().dist_sq(p), kids[1].bounds().dist_sq(p)];
            let order = if d[0] <= d[1] { [0, 1] } else { [1, 0] };
            for k in order {
                if d[k] < *best {
                    search(&kids[k], p, best);
                }
            }
        }
    }
}

/// Closest point on a triangle via Voronoi-region classification.
pub(crate) fn closest_point_on_triangle(p: &Vec3, t: &[Vec3; 3]) -> Vec3 {
    let [a, b, c] = *t;
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}
