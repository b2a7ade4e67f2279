//! Planar contours in elliptic harmonics.
//!
//! A closed contour is fitted with an ellipse, each sample gets an elliptic
//! angle η, and `x(η)`, `y(η)` are expanded in a Fourier series in η. The
//! series is then resampled with η points that a one-dimensional diffusion
//! spreads until the reconstructed segments have equal length.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{mean_and_std, Contour2D, Vec2};
use crate::solver::{conjugate_gradient, CsrMatrix, Preconditioner, SparseSystem};

/// Focal distance of a circle, relative to its radius.
const FOCAL_FLOOR: f64 = 1e-6;
/// Samples of the ellipse arc-length table.
const ARC_TABLE: usize = 4096;
/// Fewest segments any particle is remeshed with.
pub const MIN_SEGMENTS: usize = 5;
/// Time step of the contour diffusion in units of the squared mean η spacing.
pub const CONTOUR_DT_SCALE: f64 = 1.0;
pub const CONTOUR_MAX_HALVINGS: usize = 20;

/// Confocal elliptic coordinates with a rigid placement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticDomain {
    pub e: f64,
    pub zeta0: f64,
    pub center: [f64; 2],
    /// Angle of the major axis, radians.
    pub rotation: f64,
}

impl EllipticDomain {
    pub fn new(e: f64, zeta0: f64) -> Result<Self> {
        if !(e > 0.0 && e.is_finite()) || !(zeta0 > 0.0 && zeta0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "elliptic domain needs e > 0 and zeta0 > 0, got e = {e}, zeta0 = {zeta0}"
            )));
        }
        Ok(Self {
            e,
            zeta0,
            center: [0.0, 0.0],
            rotation: 0.0,
        })
    }

    /// Ellipse with semi-major `a` along x and semi-minor `b`; a circle gets
    /// a tiny focal distance instead of a degenerate one.
    pub fn from_semi_axes(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && b <= a) {
            return Err(Error::InvalidInput(format!("semi-axes need a >= b > 0, got {a}, {b}")));
        }
        let e = (a * a - b * b).sqrt().max(FOCAL_FLOOR * a);
        Self::new(e, (a / e).acosh())
    }

    pub fn with_placement(mut self, center: Vec2, rotation: f64) -> Self {
        self.center = [center.x, center.y];
        self.rotation = rotation;
        self
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (self.e * self.zeta0.cosh(), self.e * self.zeta0.sinh())
    }

    fn rotation_matrix(&self) -> Matrix2<f64> {
        let (s, c) = self.rotation.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn to_world(&self, p: &Vec2) -> Vec2 {
        self.rotation_matrix() * p + Vec2::from(self.center)
    }

    pub fn to_local(&self, p: &Vec2) -> Vec2 {
        self.rotation_matrix().transpose() * (p - Vec2::from(self.center))
    }

    /// Ellipse arc length from η = 0, tabulated on a uniform η grid.
    fn arc_table(&self) -> Vec<f64> {
        let mut table = vec![0.0; ARC_TABLE + 1];
        let mut prev = elliptic_coords(self, 0.0);
        for k in 1..=ARC_TABLE {
            let p = elliptic_coords(self, TAU * k as f64 / ARC_TABLE as f64);
            table[k] = table[k - 1] + (p - prev).norm();
            prev = p;
        }
        table
    }
}

/// Point of the shell `ζ = ζ₀` at angle η, in the domain's local frame.
pub fn elliptic_coords(domain: &EllipticDomain, eta: f64) -> Vec2 {
    Vec2::new(
        domain.e * domain.zeta0.cosh() * eta.cos(),
        domain.e * domain.zeta0.sinh() * eta.sin(),
    )
}

/// `(ζ, η)` of a local-frame point, with `η ∈ [0, 2π)`.
///
/// Uses `x + iy = e cosh(ζ + iη)`. The foci have no unique angle.
pub fn elliptic_coords_inverse(domain: &EllipticDomain, p: &Vec2) -> Result<(f64, f64)> {
    let f = Vec2::new(domain.e, 0.0);
    let scale = domain.e.max(p.norm());
    if (p - f).norm() < 1e-12 * scale || (p + f).norm() < 1e-12 * scale {
        return Err(Error::Singular(format!("({}, {}) is a focus", p.x, p.y)));
    }
    let mut w = (Complex64::new(p.x, p.y) / domain.e).acosh();
    if w.re < 0.0 {
        w = -w;
    }
    Ok((w.re, w.im.rem_euclid(TAU)))
}

/// Fourier weights of a contour over η, up to degree `n_max`.
///
/// Only `k ≥ 0` is stored; `c₋ₖ = conj(cₖ)` because the contour is real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourWeights {
    pub domain: EllipticDomain,
    x: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl ContourWeights {
    pub fn new(domain: EllipticDomain, mut x: Vec<Complex64>, mut y: Vec<Complex64>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient lists of lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        x[0].im = 0.0;
        y[0].im = 0.0;
        Ok(Self { domain, x, y })
    }

    pub fn n_max(&self) -> usize {
        self.x.len() - 1
    }

    /// `(c_k^x, c_k^y)` for `|k| ≤ n_max`.
    pub fn coefficient(&self, k: i64) -> (Complex64, Complex64) {
        let i = k.unsigned_abs() as usize;
        let (cx, cy) = (self.x[i], self.y[i]);
        if k < 0 {
            (cx.conj(), cy.conj())
        } else {
            (cx, cy)
        }
    }

    /// Local-frame point at η.
    pub fn local_point(&self, eta: f64) -> Vec2 {
        let mut p = Vec2::new(self.x[0].re, self.y[0].re);
        for k in 1..self.x.len() {
            let rot = Complex64::from_polar(2.0, k as f64 * eta);
            p += Vec2::new((self.x[k] * rot).re, (self.y[k] * rot).re);
        }
        p
    }

    pub fn reconstruct(&self, etas: &[f64]) -> Vec<Vec2> {
        etas.iter()
            .map(|&e| self.domain.to_world(&self.local_point(e)))
            .collect()
    }
}

/// Result of [`decompose_contour`].
#[derive(Debug, Clone)]
pub struct ContourFit {
    pub weights: ContourWeights,
    /// η assigned to each input point.
    pub eta: Vec<f64>,
    pub residual_rms: f64,
}

/// Covariance ellipse of the contour vertices.
///
/// For points evenly spaced in the angle of an ellipse the vertex
/// covariance is exactly `diag(a², b²)/2`, so such input is recovered.
pub fn fit_ellipse(contour: &Contour2D) -> Result<EllipticDomain> {
    let pts = contour.points();
    let n = pts.len() as f64;
    let center = pts.iter().sum::<Vec2>() / n;
    let cov = pts.iter().fold(Matrix2::zeros(), |acc, p| {
        let d = p - center;
        acc + d * d.transpose()
    }) / n;
    let eig = cov.symmetric_eigen();
    let (i_max, i_min) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let (l1, l2) = (eig.eigenvalues[i_max], eig.eigenvalues[i_min]);
    if !(l2 > 1e-14 * l1) {
        return Err(Error::Degenerate("contour is collinear".into()));
    }
    let axis = eig.eigenvectors.column(i_max);
    let domain = EllipticDomain::from_semi_axes((2.0 * l1).sqrt(), (2.0 * l2).sqrt())?;
    Ok(domain.with_placement(center, axis[1].atan2(axis[0])))
}

/// η of every contour point.
///
/// The confocal angle of each point is used when it winds once around the
/// contour without turning back. Otherwise the points are spread over the
/// fitted ellipse in proportion to arc length, starting at the confocal
/// angle of the first point.
fn assign_eta(contour: &Contour2D, domain: &EllipticDomain) -> Result<Vec<f64>> {
    let local: Vec<Vec2> = contour.points().iter().map(|p| domain.to_local(p)).collect();
    let n = local.len();
    let angles = local
        .iter()
        .map(|p| elliptic_coords_inverse(domain, p).map(|(_, eta)| eta))
        .collect::<Result<Vec<f64>>>();
    if let Ok(angles) = &angles {
        let steps: Vec<f64> = (0..n)
            .map(|k| {
                let d = angles[(k + 1) % n] - angles[k];
                d - TAU * (d / TAU).round()
            })
            .collect();
        let winding: f64 = steps.iter().sum();
        let sign = winding.signum();
        if (winding.abs() - TAU).abs() < 1e-6 && steps.iter().all(|s| s * sign > 0.0) {
            return Ok(angles.clone());
        }
    }

    // Orientation from the shoelace formula.
    let area: f64 = (0..n).map(|k| local[k].perp(&local[(k + 1) % n])).sum();
    let sign = if area >= 0.0 { 1.0 } else { -1.0 };
    let start = elliptic_coords_inverse(domain, &local[0])
        .map(|(_, e)| e)
        .unwrap_or(0.0);
    let table = domain.arc_table();
    let total = table[ARC_TABLE];
    let s0 = interpolate(&table, start / TAU * ARC_TABLE as f64);
    let seg = contour.segment_lengths();
    let length: f64 = seg.iter().sum();
    let mut s = 0.0;
    let mut etas = Vec::with_capacity(n);
    for k in 0..n {
        let target = (s0 + sign * s / length * total).rem_euclid(total);
        etas.push(invert_table(&table, target));
        s += seg[k];
    }
    Ok(etas)
}

fn interpolate(table: &[f64], x: f64) -> f64 {
    let i = (x.floor() as usize).min(table.len() - 2);
    let t = x - i as f64;
    table[i] * (1.0 - t) + table[i + 1] * t
}

fn invert_table(table: &[f64], s: f64) -> f64 {
    let i = table.partition_point(|&v| v <= s).clamp(1, table.len() - 1) - 1;
    let t = (s - table[i]) / (table[i + 1] - table[i]);
    TAU * (i as f64 + t) / (table.len() - 1) as f64
}

/// Least-squares Fourier fit of a closed contour.
pub fn decompose_contour(contour: &Contour2D, n_max: usize) -> Result<ContourFit> {
    if !contour.is_closed() {
        return Err(Error::Topology("contour decomposition needs a closed contour".into()));
    }
    let unknowns = 2 * n_max + 1;
    let rows = contour.len();
    if rows < unknowns {
        return Err(Error::Underdetermined { rows, unknowns });
    }
    let domain = fit_ellipse(contour)?;
    let eta = assign_eta(contour, &domain)?;
    let a = DMatrix::from_fn(rows, unknowns, |r, c| match c {
        0 => 1.0,
        c if c % 2 == 1 => (((c + 1) / 2) as f64 * eta[r]).cos(),
        c => ((c / 2) as f64 * eta[r]).sin(),
    });
    let b = DMatrix::from_fn(rows, 2, |r, c| domain.to_local(&contour.points()[r])[c]);
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if s_min <= 1e-12 * s_max {
        return Err(Error::RankDeficient {
            condition: s_max / s_min,
        });
    }
    let coef = svd.solve(&b, 0.0).map_err(|e| Error::Degenerate(e.to_string()))?;
    let residual = &a * &coef - &b;
    let residual_rms = (residual.norm_squared() / rows as f64).sqrt();

    let column = |d: usize| -> Vec<Complex64> {
        (0..=n_max)
            .map(|k| match k {
                0 => Complex64::new(coef[(0, d)], 0.0),
                k => Complex64::new(coef[(2 * k - 1, d)], -coef[(2 * k, d)]) / 2.0,
            })
            .collect()
    };
    Ok(ContourFit {
        weights: ContourWeights::new(domain, column(0), column(1))?,
        eta,
        residual_rms,
    })
}

/// Periodic 1D Laplacian on sorted angles: weight `1/Δη` per gap.
pub fn ring_laplacian(eta: &[f64]) -> CsrMatrix {
    let n = eta.len();
    let mut triplets = Vec::with_capacity(4 * n);
    for (j, h) in ring_gaps(eta).into_iter().enumerate() {
        let k = (j + 1) % n;
        let w = 1.0 / h;
        triplets.extend([(j, k, w), (k, j, w), (j, j, -w), (k, k, -w)]);
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// `η_{j+1} − η_j` around the ring.
fn ring_gaps(eta: &[f64]) -> Vec<f64> {
    let n = eta.len();
    (0..n)
        .map(|j| {
            if j + 1 < n {
                eta[j + 1] - eta[j]
            } else {
                eta[0] + TAU - eta[j]
            }
        })
        .collect()
}

/// Lumped mass on the ring: half of each neighbouring gap.
pub fn ring_mass(eta: &[f64]) -> Vec<f64> {
    let h = ring_gaps(eta);
    let n = h.len();
    (0..n).map(|j| 0.5 * (h[(j + n - 1) % n] + h[j])).collect()
}

/// One row of a contour remeshing trace.
#[derive(Debug, Clone, Serialize)]
pub struct ContourRecord {
    pub iteration: usize,
    pub dt: f64,
    pub halvings: usize,
    pub std_segment: f64,
    pub mean_segment: f64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct ContourRemesh {
    pub contour: Contour2D,
    pub eta: Vec<f64>,
    pub initial_std: f64,
    pub initial_mean: f64,
    pub initial_length: f64,
    pub trace: Vec<ContourRecord>,
}

impl ContourRemesh {
    pub fn final_std(&self) -> f64 {
        self.trace.last().map_or(self.initial_std, |r| r.std_segment)
    }
}

struct RingState {
    points: Vec<Vec2>,
    segments: Vec<f64>,
    std: f64,
    mean: f64,
}

fn ring_state(weights: &ContourWeights, eta: &[f64]) -> RingState {
    let points = weights.reconstruct(eta);
    let n = points.len();
    let segments: Vec<f64> = (0..n).map(|j| (points[(j + 1) % n] - points[j]).norm()).collect();
    let (mean, std) = mean_and_std(&segments);
    RingState {
        points,
        segments,
        std,
        mean,
    }
}

/// Resamples `weights` with `n_points` whose reconstructed spacing is
/// equalized by diffusing segment length over η.
///
/// Starts from uniform η. A step that reorders the samples or raises the
/// spacing spread is retried at half the time step; the run ends after
/// `i_max` accepted steps or when no step size helps.
pub fn remesh_contour(weights: &ContourWeights, n_points: usize, i_max: usize) -> Result<ContourRemesh> {
    if n_points < MIN_SEGMENTS {
        return Err(Error::InvalidInput(format!(
            "contour remeshing needs at least {MIN_SEGMENTS} points, got {n_points}"
        )));
    }
    let n = n_points;
    let mut eta: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let mut state = ring_state(weights, &eta);
    let (initial_std, initial_mean) = (state.std, state.mean);
    let initial_length = state.segments.iter().sum();
    let mut trace = Vec::new();
    let h_mean = TAU / n as f64;
    let mut dt_prev: Option<f64> = None;

    'outer: for iteration in 1..=i_max {
        if state.std <= 1e-12 * state.mean {
            break;
        }
        let u: Vec<f64> = (0..n)
            .map(|j| 0.5 * (state.segments[(j + n - 1) % n] + state.segments[j]) / initial_mean)
            .collect();
        let u_mean = u.iter().sum::<f64>() / n as f64;
        let mass = ring_mass(&eta);
        let lap = ring_laplacian(&eta);
        let mut dt = CONTOUR_DT_SCALE * h_mean * h_mean;
        if let Some(prev) = dt_prev {
            dt = dt.min(2.0 * prev);
        }
        for halvings in 0..=CONTOUR_MAX_HALVINGS {
            let rhs: Vec<f64> = mass.iter().zip(&u).map(|(m, u)| m * u).collect();
            let system = SparseSystem::new(lap.scaled_plus_diagonal(-dt, &mass), rhs)?;
            let u_next = conjugate_gradient(&system, Preconditioner::Jacobi, Some(&u))?.x;
            let h = ring_gaps(&eta);
            let moved: Vec<f64> = (0..n)
                .map(|j| {
                    let (prev, next) = ((j + n - 1) % n, (j + 1) % n);
                    let slope = (u_next[next] - u_next[prev]) / (h[prev] + h[j]);
                    eta[j] + dt * slope / u_mean
                })
                .collect();
            let ordered = ring_gaps(&moved).iter().all(|&g| g > 0.0);
            if ordered {
                let next = ring_state(weights, &moved);
                if next.std <= state.std {
                    trace.push(ContourRecord {
                        iteration,
                        dt,
                        halvings,
                        std_segment: next.std,
                        mean_segment: next.mean,
                        length: next.segments.iter().sum(),
                    });
                    eta = moved;
                    state = next;
                    dt_prev = Some(dt);
                    continue 'outer;
                }
            }
            dt *= 0.5;
        }
        break;
    }
    Ok(ContourRemesh {
        contour: Contour2D::new(state.points, true)?,
        eta: eta.iter().map(|e| e.rem_euclid(TAU)).collect(),
        initial_std,
        initial_mean,
        initial_length,
        trace,
    })
}

/// Segments for a particle of length `length`, interpolated linearly from
/// [`MIN_SEGMENTS`] at the shortest particle to `max_segments` at the longest.
pub fn segment_budget(length: f64, shortest: f64, longest: f64, max_segments: usize) -> usize {
    if longest - shortest <= 1e-12 * longest {
        return max_segments;
    }
    let t = ((length - shortest) / (longest - shortest)).clamp(0.0, 1.0);
    let lo = MIN_SEGMENTS as f64;
    (lo + t * (max_segments as f64 - lo)).round() as usize
}

/// Whether any two non-adjacent segments of a closed polygon touch.
pub fn self_intersects(points: &[Vec2]) -> bool {
    let n = points.len();
    let orient = |a: &Vec2, b: &Vec2, c: &Vec2| (b - a).perp(&(c - a));
    let on_segment = |a: &Vec2, b: &Vec2, p: &Vec2| {
        p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    for i in 0..n {
        let (a, b) = (&points[i], &points[(i + 1) % n]);
        for j in i + 2..n {
            if (j + 1) % n == i {
                continue;
            }
            let (c, d) = (&points[j], &points[(j + 1) % n]);
            let (d1, d2) = (orient(c, d, a), orient(c, d, b));
            let (d3, d4) = (orient(a, b, c), orient(a, b, d));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
            if (d1 == 0.0 && on_segment(c, d, a))
                || (d2 == 0.0 && on_segment(c, d, b))
                || (d3 == 0.0 && on_segment(a, b, c))
                || (d4 == 0.0 && on_segment(a, b, d))
            {
                return true;
            }
        }
    }
    false
}

/// A contour with an identifier.
#[derive(Debug, Clone)]
pub struct Particle {
    pub id: usize,
    pub contour: Contour2D,
}

/// Per-particle outcome of [`remesh_microstructure_2d`].
#[derive(Debug, Clone)]
pub struct ParticleRemesh {
    pub id: usize,
    pub segments: usize,
    /// Degree actually used; lowered for particles with few input points.
    pub n_max: usize,
    pub residual_rms: f64,
    pub input_length: f64,
    pub remesh: ContourRemesh,
}

/// Decomposes and remeshes every particle independently.
///
/// Fails with the ids of all particles whose output polygon crosses itself.
pub fn remesh_microstructure_2d(
    particles: &[Particle],
    max_segments_largest: usize,
    n_max: usize,
    i_max: usize,
) -> Result<Vec<ParticleRemesh>> {
    if particles.is_empty() {
        return Err(Error::InvalidInput("no particles".into()));
    }
    if max_segments_largest < MIN_SEGMENTS {
        return Err(Error::InvalidInput(format!(
            "max segments {max_segments_largest} is below the minimum of {MIN_SEGMENTS}"
        )));
    }
    let lengths: Vec<f64> = particles.iter().map(|p| p.contour.length()).collect();
    let shortest = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let longest = lengths.iter().copied().fold(0.0, f64::max);
    let results = particles
        .par_iter()
        .zip(&lengths)
        .map(|(p, &length)| {
            let degree = n_max.min((p.contour.len() - 1) / 2);
            let fit = decompose_contour(&p.contour, degree)?;
            let segments = segment_budget(length, shortest, longest, max_segments_largest);
            Ok(ParticleRemesh {
                id: p.id,
                segments,
                n_max: degree,
                residual_rms: fit.residual_rms,
                input_length: length,
                remesh: remesh_contour(&fit.weights, segments, i_max)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossing: Vec<usize> = results
        .iter()
        .filter(|r| self_intersects(r.remesh.contour.points()))
        .map(|r| r.id)
        .collect();
    if !crossing.is_empty() {
        return Err(Error::SelfIntersection(crossing));
    }
    Ok(results)
}

/// Reads `x,y` rows; a header line is optional.
pub fn parse_contour_csv(text: &str) -> Result<Contour2D> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::parse(i + 1, format!("expected 2 columns, got {}", record.len())));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => points.push(Vec2::new(x, y)),
            _ if i == 0 => continue,
            _ => return Err(Error::parse(i + 1, format!("bad point {:?}", record.as_slice()))),
        }
    }
    Contour2D::new(points, true)
}

pub fn write_contour_csv(contour: &Contour2D) -> String {
    let mut out = String::from("x,y\n");
    for p in contour.points() {
        out.push_str(&format!("{:?},{:?}\n", p.x, p.y));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct ParticleDoc {
    id: usize,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct MicrostructureDoc {
    particles: Vec<ParticleDoc>,
}

/// Reads a JSON document `{"particles": [{"id": 1, "points": [[x, y], ...]}]}`.
pub fn parse_particles(text: &str) -> Result<Vec<Particle>> {
    let doc: MicrostructureDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    doc.particles
        .into_iter()
        .map(|p| {
            let contour =
                Contour2D::new(p.points.iter().map(|&q| Vec2::from(q)).collect(), true).map_err(|e| Error::Parse {
                    line: None,
                    message: format!("particle {}: {e}", p.id),
                })?;
            Ok(Particle { id: p.id, contour })
        })
        .collect()
}

pub fn write_particles(particles: &[Particle]) -> String {
    let doc = MicrostructureDoc {
        particles: particles
            .iter()
            .map(|p| ParticleDoc {
                id: p.id,
                points: p.contour.points().iter().map(|q| [q.x, q.y]).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("particle document serializes")
}

pub fn load_particles(path: impl AsRef<Path>) -> Result<Vec<Particle>> {
    let path = path.as_ref();
    parse_particles(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_examples() {
        let d = EllipticDomain::new(1.0, 1.0).unwrap();
        let p = elliptic_coords(&d, 0.0);
        assert!((p - Vec2::new(1f64.cosh(), 0.0)).norm() < 1e-15);
        let p = elliptic_coords(&d, std::f64::consts::FRAC_PI_2);
        assert!((p - Vec2::new(0.0, 1f64.sinh())).norm() < 1e-15);
    }

    #[test]
    fn inverse_rejects_foci() {
        let d = EllipticDomain::new(2.0, 0.5).unwrap();
        assert!(matches!(
            elliptic_coords_inverse(&d, &Vec2::new(-2.0, 0.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn budget_endpoints() {
        assert_eq!(segment_budget(1.0, 1.0, 10.0, 64), 5);
        assert_eq!(segment_budget(10.0, 1.0, 10.0, 64), 64);
        assert_eq!(segment_budget(3.0, 3.0, 3.0, 64), 64);
    }

    #[test]
    fn bow_tie_crosses() {
        let p = |x, y| Vec2::new(x, y);
        assert!(self_intersects(&[p(0., 0.), p(1., 1.), p(1., 0.), p(0., 1.)]));
        assert!(!self_intersects(&[p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)]));
    }
}
