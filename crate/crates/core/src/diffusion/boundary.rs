use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::solver::SparseSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Closed,
    NeumannAveragedFlux,
}

/// Rim condition of the density diffusion on open shells.
///
/// The flux through the rim relaxes the boundary density towards the mean
/// density `ū` of the previous step: for a rim vertex with boundary-edge
/// share `bᵢ` the weak form gains `Δt·κ·bᵢ·(ū − uᵢ)`, with `κ` the inverse
/// mean rim edge length. A uniform density is therefore left unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pub kind: BoundaryKind,
    pub boundary: Vec<usize>,
    pub mean_u: f64,
    /// Half the length of the rim edges at each boundary vertex.
    pub edge_share: Vec<f64>,
    pub coupling: f64,
}

impl BoundaryCondition {
    pub fn closed() -> Self {
        Self {
            kind: BoundaryKind::Closed,
            boundary: Vec::new(),
            mean_u: 0.0,
            edge_share: Vec::new(),
            coupling: 0.0,
        }
    }

    /// Averaged-flux condition on the rim of `mesh`, or the closed condition
    /// if the mesh has no rim.
    pub fn for_mesh(mesh: &TriangleMesh, mean_u: f64) -> Self {
        let rim = mesh.boundary_loop();
        if rim.is_empty() {
            return Self::closed();
        }
        let p = mesh.vertices();
        let n = rim.len();
        let lengths: Vec<f64> = (0..n).map(|k| (p[rim[(k + 1) % n]] - p[rim[k]]).norm()).collect();
        let edge_share = (0..n).map(|k| 0.5 * (lengths[k] + lengths[(k + n - 1) % n])).collect();
        let mean_len = lengths.iter().sum::<f64>() / n as f64;
        Self {
            kind: BoundaryKind::NeumannAveragedFlux,
            boundary: rim.to_vec(),
            mean_u,
            edge_share,
            coupling: 1.0 / mean_len,
        }
    }

    /// Checks that the boundary set is the rim of `mesh`.
    pub fn check(&self, mesh: &TriangleMesh) -> Result<()> {
        let consistent = match self.kind {
            BoundaryKind::Closed => self.boundary.is_empty() && mesh.is_closed(),
            BoundaryKind::NeumannAveragedFlux => {
                let mut a = self.boundary.clone();
                let mut b = mesh.boundary_loop().to_vec();
                a.sort_unstable();
                b.sort_unstable();
                !a.is_empty() && a == b && self.edge_share.len() == self.boundary.len()
            }
        };
        if consistent {
            Ok(())
        } else {
            Err(Error::Topology("boundary condition does not match the mesh rim".into()))
        }
    }
}

/// Adds the rim flux to a backward-Euler system; a no-op for closed shells.
pub fn apply_boundary_abc(system: &mut SparseSystem, dt: f64, bc: &BoundaryCondition) -> Result<()> {
    if bc.kind == BoundaryKind::Closed {
        return Ok(());
    }
    let n = system.rhs.len();
    if bc.boundary.is_empty() || bc.boundary.len() != bc.edge_share.len() || bc.boundary.iter().any(|&v| v >= n) {
        return Err(Error::Topology("boundary set inconsistent with the system".into()));
    }
    let mut diag = vec![0.0; n];
    for (&v, &b) in bc.boundary.iter().zip(&bc.edge_share) {
        let w = dt * bc.coupling * b;
        diag[v] += w;
        system.rhs[v] += w * bc.mean_u;
    }
    system.matrix = system.matrix.scaled_plus_diagonal(1.0, &diag);
    Ok(())
}
