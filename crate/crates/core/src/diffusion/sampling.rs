use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::mesh::{hex_disk, icosphere, TriangleMesh, Vec3, MAX_REFINEMENTS};
use crate::spheroidal::{pullback, CurvilinearCoords, DomainKind, SpheroidDomain};

/// Connectivity plus per-vertex `(η, φ)` on a shell; the diffusion engine
/// moves the coordinates and never touches the faces.
#[derive(Debug, Clone)]
pub struct ShellSampling {
    template: TriangleMesh,
    coords: CurvilinearCoords,
}

impl ShellSampling {
    pub fn new(faces: Vec<[usize; 3]>, coords: CurvilinearCoords) -> Result<Self> {
        let template = TriangleMesh::new(coords.shell_points(), faces)?;
        if template.is_closed() == coords.domain().kind.is_hemispheroid() {
            return Err(Error::Topology(format!(
                "{} sampling on a {:?} domain",
                if template.is_closed() { "closed" } else { "open" },
                coords.domain().kind
            )));
        }
        Ok(Self { template, coords })
    }

    /// Icosphere stretched onto the spheroid's semi-axes and pulled back.
    pub fn icosphere(domain: &SpheroidDomain, refinements: usize) -> Result<Self> {
        if domain.kind.is_hemispheroid() {
            return Err(Error::Topology("icosphere sampling needs a closed domain".into()));
        }
        let sphere = icosphere(refinements)?;
        let (a, c) = domain.semi_axes();
        let stretched: Vec<Vec3> = sphere
            .vertices()
            .iter()
            .map(|v| Vec3::new(a * v.x, a * v.y, c * v.z))
            .collect();
        let coords = pullback(domain, &stretched)?;
        Self::new(sphere.faces().to_vec(), coords)
    }

    /// Hexagonal disk whose radius maps linearly from the pole (centre) to
    /// the rim shifted by `eps_eta` (outer ring).
    pub fn hex_disk(domain: &SpheroidDomain, rings: usize, eps_eta: f64) -> Result<Self> {
        let rim = domain
            .shifted_rim_eta(eps_eta)
            .ok_or_else(|| Error::Topology("disk sampling needs a hemispheroidal domain".into()))?;
        let pole = match domain.kind {
            DomainKind::OblateHemispheroid => FRAC_PI_2,
            _ => 0.0,
        };
        let disk = hex_disk(rings)?;
        let (eta, phi) = disk
            .vertices()
            .iter()
            .map(|v| {
                let r = v.x.hypot(v.y).min(1.0);
                (pole + r * (rim - pole), v.y.atan2(v.x))
            })
            .unzip();
        Self::new(disk.faces().to_vec(), CurvilinearCoords::new(*domain, eta, phi)?)
    }

    /// Icosphere for closed domains, hexagonal disk for hemispheroids.
    ///
    /// `resolution` is the refinement level for closed shells; for open
    /// shells the disk gets `2^resolution` rings.
    pub fn for_domain(domain: &SpheroidDomain, resolution: usize, eps_eta: f64) -> Result<Self> {
        if domain.kind.is_hemispheroid() {
            if resolution > MAX_REFINEMENTS {
                return Err(Error::Guard {
                    what: "disk resolution",
                    value: resolution,
                    limit: MAX_REFINEMENTS,
                });
            }
            Self::hex_disk(domain, 1 << resolution, eps_eta)
        } else {
            Self::icosphere(domain, resolution)
        }
    }

    pub fn coords(&self) -> &CurvilinearCoords {
        &self.coords
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        self.template.faces()
    }

    pub fn n_v(&self) -> usize {
        self.coords.len()
    }

    /// Ordered rim vertices; empty for closed shells.
    pub fn boundary(&self) -> &[usize] {
        self.template.boundary_loop()
    }

    /// The sampling laid out on the shell itself.
    pub fn shell_mesh(&self) -> TriangleMesh {
        self.template.with_vertices(self.coords.shell_points())
    }

    /// Same connectivity with other positions.
    pub fn mesh_with(&self, vertices: Vec<Vec3>) -> TriangleMesh {
        self.template.with_vertices(vertices)
    }

    /// Same connectivity with other coordinates on the same domain.
    pub fn with_coords(&self, coords: CurvilinearCoords) -> Result<Self> {
        if coords.len() != self.n_v() || coords.domain() != self.coords.domain() {
            return Err(Error::InvalidInput("coordinates do not match the sampling".into()));
        }
        Ok(Self {
            template: self.template.clone(),
            coords,
        })
    }
}
