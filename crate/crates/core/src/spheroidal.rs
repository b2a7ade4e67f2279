//! Oblate and prolate (hemi)spheroidal coordinates on the shell `ζ = ζ₀`.
//!
//! Oblate:  `(e coshζ cosη cosφ, e coshζ cosη sinφ, e sinhζ sinη)`
//! Prolate: `(e sinhζ sinη cosφ, e sinhζ sinη sinφ, e coshζ cosη)`
//!
//! The inverse map uses the complex inverse hyperbolic cosine of the
//! meridian-plane point, which is also the pullback that snaps points near
//! the shell back onto it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, Vec3};

/// Coordinates closer than this to `ζ = 0` are on the focal set, where the
/// sign of η is ambiguous.
const SINGULAR_ZETA: f64 = 1e-12;

/// Slack accepted on η before a value counts as out of range.
const ETA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Oblate,
    Prolate,
    OblateHemispheroid,
    ProlateHemispheroid,
}

impl DomainKind {
    pub fn is_oblate(self) -> bool {
        matches!(self, Self::Oblate | Self::OblateHemispheroid)
    }

    pub fn is_hemispheroid(self) -> bool {
        matches!(self, Self::OblateHemispheroid | Self::ProlateHemispheroid)
    }
}

/// The analysis shell: kind, focal distance `e` and shell coordinate `ζ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpheroidDomain {
    pub kind: DomainKind,
    pub e: f64,
    pub zeta0: f64,
}

impl SpheroidDomain {
    pub fn new(kind: DomainKind, e: f64, zeta0: f64) -> Result<Self> {
        if !(e > 0.0 && e.is_finite()) || !(zeta0 > 0.0 && zeta0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "spheroid needs e > 0 and zeta0 > 0 (got e = {e}, zeta0 = {zeta0})"
            )));
        }
        Ok(Self { kind, e, zeta0 })
    }

    /// Shell with equatorial semi-axis `a` and polar semi-axis `c`.
    ///
    /// `a > c` gives an oblate shell and `a < c` a prolate one; `hemi` picks
    /// the hemispheroidal variant. Equal axes are rejected.
    pub fn from_semi_axes(a: f64, c: f64, hemi: bool) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) || a == c {
            return Err(Error::Degenerate(format!(
                "semi-axes a = {a}, c = {c} do not define a spheroid"
            )));
        }
        let kind = match (a > c, hemi) {
            (true, false) => DomainKind::Oblate,
            (true, true) => DomainKind::OblateHemispheroid,
            (false, false) => DomainKind::Prolate,
            (false, true) => DomainKind::ProlateHemispheroid,
        };
        let (e, zeta0) = if a > c {
            ((a * a - c * c).sqrt(), (c / a).atanh())
        } else {
            ((c * c - a * a).sqrt(), (a / c).atanh())
        };
        Self::new(kind, e, zeta0)
    }

    /// Equatorial and polar semi-axes `(a, c)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        let (ch, sh) = (self.e * self.zeta0.cosh(), self.e * self.zeta0.sinh());
        if self.kind.is_oblate() {
            (ch, sh)
        } else {
            (sh, ch)
        }
    }

    pub fn eta_range(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::Oblate => (-FRAC_PI_2, FRAC_PI_2),
            DomainKind::Prolate => (0.0, PI),
            _ => (0.0, FRAC_PI_2),
        }
    }

    /// η of the true rim of a hemispheroid.
    pub fn rim_eta(&self) -> Option<f64> {
        match self.kind {
            DomainKind::OblateHemispheroid => Some(0.0),
            DomainKind::ProlateHemispheroid => Some(FRAC_PI_2),
            _ => None,
        }
    }

    /// Rim moved inside the domain by `eps_eta`, away from the basis singularity.
    pub fn shifted_rim_eta(&self, eps_eta: f64) -> Option<f64> {
        match self.kind {
            DomainKind::OblateHemispheroid => Some(eps_eta),
            DomainKind::ProlateHemispheroid => Some(FRAC_PI_2 - eps_eta),
            _ => None,
        }
    }

    fn check_eta(&self, eta: f64) -> Result<()> {
        let (lo, hi) = self.eta_range();
        if eta < lo - ETA_SLACK || eta > hi + ETA_SLACK || eta.is_nan() {
            return Err(Error::OutOfRange(format!(
                "eta = {eta} outside [{lo}, {hi}] for {:?}",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn clamp_eta(&self, eta: f64) -> f64 {
        let (lo, hi) = self.eta_range();
        eta.clamp(lo, hi)
    }

    /// Point on the shell.
    pub fn forward(&self, eta: f64, phi: f64) -> Result<Vec3> {
        self.check_eta(eta)?;
        Ok(self.point(self.zeta0, eta, phi))
    }

    /// Unchecked evaluation at an arbitrary ζ.
    pub fn point(&self, zeta: f64, eta: f64, phi: f64) -> Vec3 {
        let (ch, sh) = (self.e * zeta.cosh(), self.e * zeta.sinh());
        let (se, ce) = eta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        if self.kind.is_oblate() {
            Vec3::new(ch * ce * cp, ch * ce * sp, sh * se)
        } else {
            Vec3::new(sh * se * cp, sh * se * sp, ch * ce)
        }
    }

    /// `(ζ, η, φ)` of a point, with φ in `[0, 2π)`.
    pub fn inverse(&self, p: &Vec3) -> Result<(f64, f64, f64)> {
        let rho = p.x.hypot(p.y);
        let arg = if self.kind.is_oblate() {
            Complex64::new(rho, p.z)
        } else {
            Complex64::new(p.z, rho)
        } / self.e;
        let w = arg.acosh();
        let (zeta, eta) = (w.re, w.im);
        if zeta < SINGULAR_ZETA {
            return Err(Error::Singular(format!(
                "point ({}, {}, {}) lies on the focal set (zeta = {zeta:e})",
                p.x, p.y, p.z
            )));
        }
        Ok((zeta, eta, wrap_phi(p.y.atan2(p.x))))
    }

    /// Latitude variable fed to the Legendre factor of the basis.
    pub fn xi(&self, eta: f64) -> f64 {
        match self.kind {
            DomainKind::Oblate => eta.sin(),
            DomainKind::Prolate => eta.cos(),
            DomainKind::OblateHemispheroid => 2.0 * eta.sin() - 1.0,
            DomainKind::ProlateHemispheroid => 1.0 - eta.cos(),
        }
    }

    /// Inverse of [`Self::xi`] over the domain range.
    pub fn eta_of_xi(&self, xi: f64) -> f64 {
        match self.kind {
            DomainKind::Oblate => xi.clamp(-1.0, 1.0).asin(),
            DomainKind::Prolate => xi.clamp(-1.0, 1.0).acos(),
            DomainKind::OblateHemispheroid => ((xi + 1.0) / 2.0).clamp(0.0, 1.0).asin(),
            DomainKind::ProlateHemispheroid => (1.0 - xi).clamp(0.0, 1.0).acos(),
        }
    }

    /// ξ interval covered by the domain.
    pub fn xi_range(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::ProlateHemispheroid => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }

    /// Metric scale factors `(h_η, h_φ)` on the shell.
    pub fn scale_factors(&self, eta: f64) -> (f64, f64) {
        let sh = self.zeta0.sinh();
        let h_eta = self.e * (sh * sh + eta.sin().powi(2)).sqrt();
        let h_phi = if self.kind.is_oblate() {
            self.e * self.zeta0.cosh() * eta.cos()
        } else {
            self.e * sh * eta.sin()
        };
        (h_eta, h_phi.abs())
    }

    /// Outward unit normal of the shell at `(η, φ)`.
    pub fn normal(&self, eta: f64, phi: f64) -> Vec3 {
        let p = self.point(self.zeta0, eta, phi);
        let (a, c) = self.semi_axes();
        Vec3::new(p.x / (a * a), p.y / (a * a), p.z / (c * c)).normalize()
    }
}

pub fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Per-vertex `(η, φ)` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvilinearCoords {
    eta: Vec<f64>,
    phi: Vec<f64>,
    domain: SpheroidDomain,
}

impl CurvilinearCoords {
    pub fn new(domain: SpheroidDomain, eta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if eta.len() != phi.len() {
            return Err(Error::InvalidInput(format!(
                "{} eta values but {} phi values",
                eta.len(),
                phi.len()
            )));
        }
        for &e in &eta {
            domain.check_eta(e)?;
        }
        let eta = eta.into_iter().map(|e| domain.clamp_eta(e)).collect();
        let phi = phi.into_iter().map(wrap_phi).collect();
        Ok(Self { eta, phi, domain })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn domain(&self) -> &SpheroidDomain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Shell positions of all samples.
    pub fn shell_points(&self) -> Vec<Vec3> {
        self.eta
            .iter()
            .zip(&self.phi)
            .map(|(&e, &p)| self.domain.point(self.domain.zeta0, e, p))
            .collect()
    }

    pub fn xi(&self) -> Vec<f64> {
        self.eta.iter().map(|&e| self.domain.xi(e)).collect()
    }
}

/// Projects points near the shell onto it along the coordinate hyperbolas,
/// dropping ζ. η is clamped into the domain range.
pub fn pullback(domain: &SpheroidDomain, points: &[Vec3]) -> Result<CurvilinearCoords> {
    let coords: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| {
            let (_, eta, phi) = domain.inverse(p)?;
            Ok((domain.clamp_eta(eta), phi))
        })
        .collect::<Result<_>>()?;
    let (eta, phi) = coords.into_iter().unzip();
    Ok(CurvilinearCoords {
        eta,
        phi,
        domain: *domain,
    })
}

/// Maps a mesh (already in the domain frame) onto the shell by hyperbolic
/// projection, rejecting folds.
pub fn map_to_domain(mesh: &TriangleMesh, domain: &SpheroidDomain) -> Result<CurvilinearCoords> {
    let coords = pullback(domain, mesh.vertices())?;
    let shell = mesh.with_vertices(coords.shell_points());

    let mut flipped = 0;
    for f in 0..shell.n_f() {
        let [a, b, c] = shell.face_vertices(f);
        let n = (b - a).cross(&(c - a));
        let tri = mesh.faces()[f];
        let outward: Vec3 = tri.iter().map(|&v| domain.normal(coords.eta[v], coords.phi[v])).sum();
        if n.dot(&outward) <= 0.0 {
            flipped += 1;
        }
    }
    // A consistently inward-facing input is a valid orientation, not a fold.
    let flipped = flipped.min(shell.n_f() - flipped);

    let mut collapsed = 0;
    for [i, j] in mesh.edges() {
        if (shell.vertices()[i] - shell.vertices()[j]).norm() < 1e-8 * domain.e.max(1.0) {
            collapsed += 1;
        }
    }
    if flipped > 0 || collapsed > 0 {
        return Err(Error::Fold {
            faces: flipped,
            collapsed,
        });
    }
    Ok(coords)
}

/// Rigid frame of a fitted domain: `local = rotation^T (world - center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub center: [f64; 3],
    /// Row-major rotation whose columns are the local axes in world space.
    pub rotation: [[f64; 3]; 3],
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            center: [0.0; 3],
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.rotation[i][j])
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        self.matrix().transpose() * (p - Vec3::from(self.center))
    }

    pub fn to_world(&self, p: &Vec3) -> Vec3 {
        self.matrix() * p + Vec3::from(self.center)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainFit {
    pub domain: SpheroidDomain,
    pub frame: Frame,
}

impl DomainFit {
    pub fn local_mesh(&self, mesh: &TriangleMesh) -> TriangleMesh {
        mesh.with_vertices(mesh.vertices().iter().map(|p| self.frame.to_local(p)).collect())
    }
}

/// Relative axis gap below which a shape is treated as a sphere.
const SPHERE_TOLERANCE: f64 = 1e-3;
/// Focal distance used for spheres, as a fraction of the radius.
const SPHERE_FOCAL_FLOOR: f64 = 0.05;

/// Fits a shell by principal axes and extents.
///
/// Closed meshes get an oblate or prolate shell depending on which axis
/// stands apart; open meshes get a hemispheroid whose rim plane is fitted to
/// the boundary loop. A `kind_hint` overrides the automatic choice.
pub fn fit_domain(mesh: &TriangleMesh, kind_hint: Option<DomainKind>) -> Result<DomainFit> {
    if mesh.is_closed() {
        if kind_hint.is_some_and(|k| k.is_hemispheroid()) {
            return Err(Error::Topology(
                "hemispheroidal domain requested for a closed mesh".into(),
            ));
        }
        fit_closed(mesh, kind_hint)
    } else {
        if kind_hint.is_some_and(|k| !k.is_hemispheroid()) {
            return Err(Error::Topology("open mesh needs a hemispheroidal domain".into()));
        }
        fit_open(mesh, kind_hint)
    }
}

fn principal_axes(points: &[Vec3], weights: &[f64]) -> (Vec3, Matrix3<f64>, Vec3) {
    let total: f64 = weights.iter().sum();
    let center = points.iter().zip(weights).map(|(p, w)| p * *w).sum::<Vec3>() / total;
    let cov = points
        .iter()
        .zip(weights)
        .map(|(p, w)| (p - center) * (p - center).transpose() * *w)
        .sum::<Matrix3<f64>>()
        / total;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut axes = Matrix3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
    if axes.determinant() < 0.0 {
        axes.set_column(0, &(-axes.column(0)));
    }
    let values = Vec3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    (center, axes, values)
}

fn frame_from(center: Vec3, axes: Matrix3<f64>) -> Frame {
    Frame {
        center: center.into(),
        rotation: std::array::from_fn(|i| std::array::from_fn(|j| axes[(i, j)])),
    }
}

fn fit_closed(mesh: &TriangleMesh, kind_hint: Option<DomainKind>) -> Result<DomainFit> {
    let (centroids, areas): (Vec<Vec3>, Vec<f64>) = (0..mesh.n_f())
        .map(|f| {
            let [a, b, c] = mesh.face_vertices(f);
            ((a + b + c) / 3.0, 0.5 * (b - a).cross(&(c - a)).norm())
        })
        .unzip();
    let (center, axes, _) = principal_axes(&centroids, &areas);
    let local: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .map(|p| axes.transpose() * (p - center))
        .collect();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in &local {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let center = center + axes * ((lo + hi) / 2.0);
    let ext = (hi - lo) / 2.0;
    if ext.min() <= 1e-12 * ext.max() {
        return Err(Error::Degenerate(format!("flat extents {ext:?}")));
    }
    // Extents are sorted ascending along the PCA axes.
    let gap_low = ext[1] - ext[0];
    let gap_high = ext[2] - ext[1];
    let prolate = match kind_hint {
        Some(DomainKind::Prolate) => true,
        Some(DomainKind::Oblate) => false,
        _ => gap_high > gap_low,
    };
    // Polar axis becomes local z, keeping a right-handed frame.
    let axes = if prolate {
        axes
    } else {
        Matrix3::from_columns(&[
            axes.column(1).into_owned(),
            axes.column(2).into_owned(),
            axes.column(0).into_owned(),
        ])
    };
    let (a, c) = if prolate {
        ((ext[0] + ext[1]) / 2.0, ext[2])
    } else {
        ((ext[1] + ext[2]) / 2.0, ext[0])
    };
    let domain = if (a - c).abs() / a < SPHERE_TOLERANCE && kind_hint.is_none() {
        let e = SPHERE_FOCAL_FLOOR * a;
        SpheroidDomain::new(DomainKind::Prolate, e, (a / e).asinh())?
    } else {
        match (prolate, a > c) {
            (false, true) | (true, false) => SpheroidDomain::from_semi_axes(a, c, false)?,
            // The hint forced a kind the extents disagree with.
            (true, true) | (false, false) => {
                let e = SPHERE_FOCAL_FLOOR * a;
                if prolate {
                    SpheroidDomain::new(DomainKind::Prolate, e, (a / e).asinh())?
                } else {
                    SpheroidDomain::new(DomainKind::Oblate, e, (a / e).acosh())?
                }
            }
        }
    };
    Ok(DomainFit {
        domain,
        frame: frame_from(center, axes),
    })
}

fn fit_open(mesh: &TriangleMesh, kind_hint: Option<DomainKind>) -> Result<DomainFit> {
    let rim: Vec<Vec3> = mesh.boundary_loop().iter().map(|&v| mesh.vertices()[v]).collect();
    let (rim_center, axes, values) = principal_axes(&rim, &vec![1.0; rim.len()]);
    if values[1] <= 1e-12 * values[2] {
        return Err(Error::Degenerate("boundary loop is collinear".into()));
    }
    let mut normal = axes.column(0).into_owned();
    let mean = mesh.vertices().iter().sum::<Vec3>() / mesh.n_v() as f64;
    if (mean - rim_center).dot(&normal) < 0.0 {
        normal = -normal;
    }
    let u = axes.column(1).into_owned();
    let axes = Matrix3::from_columns(&[u, normal.cross(&u), normal]);
    let a = rim
        .iter()
        .map(|p| {
            let d = p - rim_center;
            (d - normal * d.dot(&normal)).norm()
        })
        .sum::<f64>()
        / rim.len() as f64;
    let c = mesh
        .vertices()
        .iter()
        .map(|p| (p - rim_center).dot(&normal))
        .fold(0.0, f64::max);
    if !(c > 1e-12 * a) {
        return Err(Error::Degenerate("open mesh has no height above its rim".into()));
    }
    let sphere_like = (a - c).abs() / a < SPHERE_TOLERANCE;
    let oblate = match kind_hint {
        Some(k) => k.is_oblate(),
        None => a > c && !sphere_like,
    };
    let domain = if !sphere_like && ((oblate && a > c) || (!oblate && c > a)) {
        SpheroidDomain::from_semi_axes(a, c, true)?
    } else if oblate {
        let e = SPHERE_FOCAL_FLOOR * a;
        SpheroidDomain::new(DomainKind::OblateHemispheroid, e, (a / e).acosh())?
    } else {
        let e = SPHERE_FOCAL_FLOOR * a;
        SpheroidDomain::new(DomainKind::ProlateHemispheroid, e, (a / e).asinh())?
    };
    Ok(DomainFit {
        domain,
        frame: frame_from(rim_center, axes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_examples() {
        let ob = SpheroidDomain {
            kind: DomainKind::Oblate,
            e: 1.0,
            zeta0: 1.0,
        };
        let p = ob.forward(FRAC_PI_2, 0.0).unwrap();
        assert!((p - Vec3::new(0.0, 0.0, 1f64.sinh())).norm() < 1e-15);
        let zero = SpheroidDomain {
            kind: DomainKind::Oblate,
            e: 1.0,
            zeta0: 1.0,
        };
        assert_eq!(zero.point(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let pr = SpheroidDomain {
            kind: DomainKind::Prolate,
            e: 1.0,
            zeta0: 1.0,
        };
        assert_eq!(pr.point(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0));
        assert!(matches!(ob.forward(2.0, 0.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn inverse_examples() {
        let ob = SpheroidDomain {
            kind: DomainKind::Oblate,
            e: 1.0,
            zeta0: 1.0,
        };
        let (z, e, p) = ob.inverse(&Vec3::new(1f64.cosh(), 0.0, 0.0)).unwrap();
        assert!((z - 1.0).abs() < 1e-12 && e.abs() < 1e-12 && p == 0.0);
        let pr = SpheroidDomain {
            kind: DomainKind::Prolate,
            e: 1.0,
            zeta0: 2.0,
        };
        let (z, e, p) = pr.inverse(&Vec3::new(0.0, 0.0, 2f64.cosh())).unwrap();
        assert!((z - 2.0).abs() < 1e-12 && e.abs() < 1e-12 && p == 0.0);
    }

    #[test]
    fn focal_set_is_singular() {
        let ob = SpheroidDomain {
            kind: DomainKind::Oblate,
            e: 1.0,
            zeta0: 1.0,
        };
        assert!(matches!(ob.inverse(&Vec3::new(0.5, 0.0, 0.0)), Err(Error::Singular(_))));
        let pr = SpheroidDomain {
            kind: DomainKind::Prolate,
            e: 1.0,
            zeta0: 1.0,
        };
        assert!(matches!(pr.inverse(&Vec3::new(0.0, 0.0, 0.3)), Err(Error::Singular(_))));
    }

    #[test]
    fn xi_examples() {
        let d = |kind| SpheroidDomain {
            kind,
            e: 1.0,
            zeta0: 1.0,
        };
        assert_eq!(d(DomainKind::Oblate).xi(FRAC_PI_2), 1.0);
        assert_eq!(d(DomainKind::OblateHemispheroid).xi(0.0), -1.0);
        assert_eq!(d(DomainKind::OblateHemispheroid).xi(FRAC_PI_2), 1.0);
        assert!((d(DomainKind::ProlateHemispheroid).xi(PI / 3.0) - 0.5).abs() < 1e-15);
        for kind in [
            DomainKind::Oblate,
            DomainKind::Prolate,
            DomainKind::OblateHemispheroid,
            DomainKind::ProlateHemispheroid,
        ] {
            let dom = d(kind);
            let (lo, hi) = dom.eta_range();
            for k in 0..=20 {
                let eta = lo + (hi - lo) * k as f64 / 20.0;
                assert!((dom.eta_of_xi(dom.xi(eta)) - eta).abs() < 1e-7, "{kind:?} {eta}");
            }
        }
    }

    #[test]
    fn semi_axes_roundtrip() {
        let d = SpheroidDomain::from_semi_axes(2.0, 1.0, false).unwrap();
        assert_eq!(d.kind, DomainKind::Oblate);
        assert!((d.e - 3f64.sqrt()).abs() < 1e-15);
        assert!((d.zeta0 - 0.5f64.atanh()).abs() < 1e-15);
        let (a, c) = d.semi_axes();
        assert!((a - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
        let p = SpheroidDomain::from_semi_axes(1.0, 3.0, true).unwrap();
        assert_eq!(p.kind, DomainKind::ProlateHemispheroid);
        assert!((p.e - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn scale_factors_match_finite_differences() {
        for kind in [DomainKind::Oblate, DomainKind::Prolate] {
            let d = SpheroidDomain {
                kind,
                e: 1.3,
                zeta0: 0.7,
            };
            let (eta, phi, h) = (0.4, 1.1, 1e-6);
            let (he, hp) = d.scale_factors(eta);
            let fd_eta = (d.point(d.zeta0, eta + h, phi) - d.point(d.zeta0, eta - h, phi)).norm() / (2.0 * h);
            let fd_phi = (d.point(d.zeta0, eta, phi + h) - d.point(d.zeta0, eta, phi - h)).norm() / (2.0 * h);
            assert!((he - fd_eta).abs() < 1e-8 && (hp - fd_phi).abs() < 1e-8);
        }
    }

    #[test]
    fn frame_roundtrip() {
        let f = Frame {
            center: [1.0, 2.0, 3.0],
            rotation: [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        };
        let p = Vec3::new(0.3, -0.2, 5.0);
        assert!((f.to_world(&f.to_local(&p)) - p).norm() < 1e-15);
        assert!((f.to_local(&Vec3::new(1.0, 3.0, 3.0)) - Vec3::x()).norm() < 1e-15);
    }
}
