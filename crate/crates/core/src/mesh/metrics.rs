use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// Value of ρ̂ reported for zero-area faces.
pub const DEGENERATE_RHO_HAT: f64 = 2.0;

/// Faces whose area falls below this fraction of the equilateral area with
/// the same mean edge length count as degenerate.
const DEGENERATE_AREA_RATIO: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FaceMetrics {
    pub areas: Vec<f64>,
    pub normals: Vec<Vec3>,
    /// Circumradius normalized by `a_avg/√3`; 1 for equilateral faces.
    pub circumradius_hat: Vec<f64>,
    pub degenerate: Vec<bool>,
}

pub fn face_metrics(mesh: &TriangleMesh) -> FaceMetrics {
    let per_face: Vec<(f64, Vec3, f64, bool)> = (0..mesh.n_f())
        .into_par_iter()
        .map(|f| {
            let [p0, p1, p2] = mesh.face_vertices(f);
            let cross = (p1 - p0).cross(&(p2 - p0));
            let area = 0.5 * cross.norm();
            let (a, b, c) = ((p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm());
            let a_avg = (a + b + c) / 3.0;
            let reference = 3f64.sqrt() / 4.0 * a_avg * a_avg;
            if !(area > DEGENERATE_AREA_RATIO * reference) {
                return (area, Vec3::zeros(), DEGENERATE_RHO_HAT, true);
            }
            let rho = a * b * c / (4.0 * area);
            (area, cross / (2.0 * area), rho * 3f64.sqrt() / a_avg, false)
        })
        .collect();
    let mut m = FaceMetrics {
        areas: Vec::with_capacity(per_face.len()),
        normals: Vec::with_capacity(per_face.len()),
        circumradius_hat: Vec::with_capacity(per_face.len()),
        degenerate: Vec::with_capacity(per_face.len()),
    };
    for (a, n, r, d) in per_face {
        m.areas.push(a);
        m.normals.push(n);
        m.circumradius_hat.push(r);
        m.degenerate.push(d);
    }
    m
}

/// Unit face normals (zero for zero-area faces).
pub fn face_normals(mesh: &TriangleMesh) -> Vec<Vec3> {
    (0..mesh.n_f())
        .map(|f| {
            let [a, b, c] = mesh.face_vertices(f);
            (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_else(Vec3::zeros)
        })
        .collect()
}

/// Mixed Voronoi areas: circumcentric Voronoi cells inside non-obtuse faces,
/// and the A/2, A/4, A/4 split for obtuse ones. Sums to the total area.
pub fn vertex_voronoi_areas(mesh: &TriangleMesh) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_v()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        for (k, share) in face_voronoi_shares(&mesh.face_vertices(f)).into_iter().enumerate() {
            out[tri[k]] += share;
        }
    }
    out
}

pub(crate) fn face_voronoi_shares(p: &[Vec3; 3]) -> [f64; 3] {
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    if area == 0.0 {
        return [0.0; 3];
    }
    // dots[k]: cosine numerator of the corner at vertex k.
    let dots: [f64; 3] = std::array::from_fn(|k| (p[(k + 1) % 3] - p[k]).dot(&(p[(k + 2) % 3] - p[k])));
    if let Some(obtuse) = (0..3).find(|&k| dots[k] < 0.0) {
        let mut s = [area / 4.0; 3];
        s[obtuse] = area / 2.0;
        return s;
    }
    // cot at corner k = dot / (2A).
    let cot: [f64; 3] = std::array::from_fn(|k| dots[k] / (2.0 * area));
    std::array::from_fn(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        ((p[i] - p[k]).norm_squared() * cot[j] + (p[j] - p[k]).norm_squared() * cot[i]) / 8.0
    })
}

/// Voronoi areas normalized to sum to one.
pub fn area_density(mesh: &TriangleMesh) -> Result<Vec<f64>> {
    let areas = vertex_voronoi_areas(mesh);
    let total: f64 = areas.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("mesh has zero total area".into()));
    }
    Ok(areas.into_iter().map(|a| a / total).collect())
}

/// Faces whose normal points against the reference normal.
pub fn detect_normal_flips(mesh: &TriangleMesh, reference_normals: &[Vec3]) -> Result<Vec<usize>> {
    if reference_normals.len() != mesh.n_f() {
        return Err(Error::InvalidInput(format!(
            "{} reference normals for {} faces",
            reference_normals.len(),
            mesh.n_f()
        )));
    }
    Ok(face_normals(mesh)
        .iter()
        .zip(reference_normals)
        .enumerate()
        .filter(|(_, (n, r))| n.dot(r) < 0.0)
        .map(|(f, _)| f)
        .collect())
}

/// Mean and population standard deviation.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0; bins.max(1)];
        let width = (hi - lo) / counts.len() as f64;
        for &v in values {
            if v.is_finite() && width > 0.0 {
                let b = ((v - lo) / width).floor().clamp(0.0, (counts.len() - 1) as f64);
                counts[b as usize] += 1;
            }
        }
        Self { lo, hi, counts }
    }

    /// Bin counts normalized to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        self.counts
            .iter()
            .map(|&c| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / (total as f64 * width)
                }
            })
            .collect()
    }
}

/// Per-face and per-vertex quality measures of a mesh.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub face_areas: Vec<f64>,
    pub normalized_circumradius: Vec<f64>,
    pub degenerate_faces: Vec<usize>,
    pub vertex_areas: Vec<f64>,
    pub area_density: Vec<f64>,
    pub mean_u: f64,
    pub std_u: f64,
    pub mean_rho_hat: f64,
    pub rho_hat_histogram: Histogram,
    pub area_density_histogram: Histogram,
}

impl QualityReport {
    pub const BINS: usize = 40;

    pub fn new(mesh: &TriangleMesh) -> Result<Self> {
        let fm = face_metrics(mesh);
        let vertex_areas = vertex_voronoi_areas(mesh);
        let u = area_density(mesh)?;
        let (mean_u, std_u) = mean_and_std(&u);
        let valid: Vec<f64> = fm
            .circumradius_hat
            .iter()
            .zip(&fm.degenerate)
            .filter(|(_, &d)| !d)
            .map(|(&r, _)| r)
            .collect();
        let (mean_rho_hat, _) = mean_and_std(&valid);
        let u_max = u.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            rho_hat_histogram: Histogram::new(&fm.circumradius_hat, 1.0, 2.0, Self::BINS),
            area_density_histogram: Histogram::new(&u, 0.0, u_max * (1.0 + 1e-12), Self::BINS),
            degenerate_faces: (0..fm.degenerate.len()).filter(|&f| fm.degenerate[f]).collect(),
            face_areas: fm.areas,
            normalized_circumradius: fm.circumradius_hat,
            vertex_areas,
            area_density: u,
            mean_u,
            std_u,
            mean_rho_hat,
        })
    }

    /// Per-face rows: `face,area,rho_hat,degenerate`.
    pub fn write_face_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let res: csv::Result<()> = (|| {
            out.write_record(["face", "area", "rho_hat", "degenerate"])?;
            for f in 0..self.face_areas.len() {
                let degenerate = self.degenerate_faces.binary_search(&f).is_ok();
                out.serialize((f, self.face_areas[f], self.normalized_circumradius[f], degenerate))?;
            }
            out.flush()?;
            Ok(())
        })();
        res.map_err(Error::csv)
    }

    /// Per-vertex rows: `vertex,voronoi_area,area_density`.
    pub fn write_vertex_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let res: csv::Result<()> = (|| {
            out.write_record(["vertex", "voronoi_area", "area_density"])?;
            for v in 0..self.vertex_areas.len() {
                out.serialize((v, self.vertex_areas[v], self.area_density[v]))?;
            }
            out.flush()?;
            Ok(())
        })();
        res.map_err(Error::csv)
    }
}
