use crate::error::{Error, Result};
use crate::harmonics::{beta_hat, reconstruct_fast, FourierWeights};
use crate::mesh::{face_normals, mean_and_std, vertex_voronoi_areas, TriangleMesh, Vec3};
use crate::operators::{
    gradient_operator, laplacian_iso, laplacian_with_tensors, vertex_average, vertex_mass, DiffusionTensorField,
};
use crate::solver::{backward_euler_system, conjugate_gradient, dt_from_edge, DtMode, Preconditioner};
use crate::spheroidal::{pullback, CurvilinearCoords, DomainKind};

use super::boundary::{apply_boundary_abc, BoundaryCondition};
use super::config::{DiffusionConfig, DiffusionTrace, IterationRecord};
use super::sampling::ShellSampling;

#[derive(Debug, Clone)]
pub struct RemeshResult {
    pub coords: CurvilinearCoords,
    /// Reconstruction at the final coordinates, in world space.
    pub mesh: TriangleMesh,
    pub trace: DiffusionTrace,
}

/// Moves each shell point by `dt` times the tangential part of its
/// gradient and pulls the result back onto the shell.
pub fn update_coordinates(coords: &CurvilinearCoords, gradient: &[Vec3], dt: f64) -> Result<CurvilinearCoords> {
    if gradient.len() != coords.len() {
        return Err(Error::InvalidInput(format!(
            "{} gradients for {} vertices",
            gradient.len(),
            coords.len()
        )));
    }
    let domain = coords.domain();
    let moved: Vec<Vec3> = coords
        .shell_points()
        .iter()
        .zip(gradient)
        .zip(coords.eta().iter().zip(coords.phi()))
        .map(|((p, g), (&eta, &phi))| {
            let n = domain.normal(eta, phi);
            p + (g - n * n.dot(g)) * dt
        })
        .collect();
    pullback(domain, &moved)
}

/// Runs every stage of `config`; see [`run_into`].
pub fn diffuse_remesh(
    weights: &FourierWeights,
    sampling: &ShellSampling,
    config: &DiffusionConfig,
) -> Result<RemeshResult> {
    let mut trace = DiffusionTrace::default();
    let (coords, mesh) = run_into(weights, sampling, config, &mut trace)?;
    Ok(RemeshResult { coords, mesh, trace })
}

/// Multi-stage schedule; identical to [`diffuse_remesh`], which already
/// chains stages, but insists on at least two of them.
pub fn run_hierarchical(
    weights: &FourierWeights,
    sampling: &ShellSampling,
    config: &DiffusionConfig,
) -> Result<RemeshResult> {
    if config.stages.len() < 2 {
        return Err(Error::InvalidInput(
            "a hierarchical run needs at least two stages".into(),
        ));
    }
    diffuse_remesh(weights, sampling, config)
}

/// Diffusion loop writing into a caller-owned trace, so the iterations
/// completed before an error remain available.
pub fn run_into(
    weights: &FourierWeights,
    sampling: &ShellSampling,
    config: &DiffusionConfig,
    trace: &mut DiffusionTrace,
) -> Result<(CurvilinearCoords, TriangleMesh)> {
    config.validate()?;
    if sampling.coords().domain() != weights.domain() {
        return Err(Error::InvalidInput(
            "sampling and weights live on different domains".into(),
        ));
    }
    if let Some(s) = config.stages.iter().find(|s| s.n_max > weights.n_max()) {
        return Err(Error::InvalidInput(format!(
            "stage degree {} exceeds the weights' degree {}",
            s.n_max,
            weights.n_max()
        )));
    }
    let mut engine = Engine::new(sampling, config);
    engine.coords = engine.constrain(sampling.coords())?;

    for (k, stage) in config.stages.iter().enumerate() {
        let w = weights.truncated(stage.n_max);
        let mut state = engine.state(&w, trace)?;
        if k == 0 {
            engine.area_ref = state.surface.total_area();
            state = engine.state(&w, trace)?;
            trace.initial_std_u = state.std;
            trace.initial_mean_u = state.mean;
            trace.initial_boundary_length = engine.rim_length(&state.surface);
        }
        trace.stage_starts.push(trace.records.len());
        let stage_std0 = state.std;
        let mut dt_prev: Option<f64> = None;
        for _ in 0..stage.i_max {
            let Some((next, record)) = engine.iterate(&w, &state, dt_prev, k, stage.n_max, trace)? else {
                break;
            };
            dt_prev = Some(record.dt);
            trace.records.push(record);
            state = next;
            let stage_records = &trace.records[trace.stage_starts[k]..];
            if stage_records.len() >= 5 {
                let earlier = stage_records[stage_records.len() - 5].std_u;
                if earlier - state.std < config.std_tolerance * stage_std0 {
                    break;
                }
            }
        }
    }
    let w_last = weights.truncated(config.stages.last().unwrap().n_max);
    let surface = engine.reconstruct(&w_last, &engine.coords.clone(), trace)?;
    let world = surface.vertices().iter().map(|p| weights.frame.to_world(p)).collect();
    Ok((engine.coords, sampling.mesh_with(world)))
}

struct Engine<'a> {
    sampling: &'a ShellSampling,
    config: &'a DiffusionConfig,
    coords: CurvilinearCoords,
    /// Area the density is normalized by (first reconstruction).
    area_ref: f64,
    /// Vertices held fixed (see [`pole_vertices`]).
    pinned: Vec<usize>,
}

struct State {
    surface: TriangleMesh,
    u: Vec<f64>,
    std: f64,
    mean: f64,
}

enum Rejection {
    Flips,
    StdIncrease,
}

impl<'a> Engine<'a> {
    fn new(sampling: &'a ShellSampling, config: &'a DiffusionConfig) -> Self {
        Self {
            sampling,
            config,
            coords: sampling.coords().clone(),
            area_ref: 1.0,
            pinned: pole_vertices(sampling.coords()),
        }
    }

    fn reconstruct(
        &self,
        w: &FourierWeights,
        coords: &CurvilinearCoords,
        trace: &mut DiffusionTrace,
    ) -> Result<TriangleMesh> {
        let pts = reconstruct_fast(w, coords)?;
        trace.basis_evaluations += (coords.len() * beta_hat(w.n_max())) as u64;
        Ok(self.sampling.mesh_with(pts))
    }

    fn density(&self, surface: TriangleMesh) -> State {
        let mut u: Vec<f64> = vertex_voronoi_areas(&surface)
            .into_iter()
            .map(|a| a / self.area_ref)
            .collect();
        // Rim cells are cut in half by the boundary; mirror them across it.
        for &v in self.sampling.boundary() {
            u[v] *= 2.0;
        }
        let (mean, std) = mean_and_std(&u);
        State { surface, u, std, mean }
    }

    fn state(&self, w: &FourierWeights, trace: &mut DiffusionTrace) -> Result<State> {
        Ok(self.density(self.reconstruct(w, &self.coords, trace)?))
    }

    fn rim_length(&self, surface: &TriangleMesh) -> Option<f64> {
        (!surface.is_closed()).then(|| surface.boundary_length())
    }

    /// Pins rim vertices to the shifted edge and keeps the interior on the
    /// domain side of it.
    fn constrain(&self, coords: &CurvilinearCoords) -> Result<CurvilinearCoords> {
        let domain = coords.domain();
        let Some(rim) = domain.shifted_rim_eta(self.config.eps_eta) else {
            return Ok(coords.clone());
        };
        let (lo, hi) = domain.eta_range();
        let (lo, hi) = if (rim - lo).abs() < (rim - hi).abs() {
            (rim, hi)
        } else {
            (lo, rim)
        };
        let mut eta: Vec<f64> = coords.eta().iter().map(|e| e.clamp(lo, hi)).collect();
        for &v in self.sampling.boundary() {
            eta[v] = rim;
        }
        let mut phi = coords.phi().to_vec();
        for &v in &self.pinned {
            eta[v] = self.sampling.coords().eta()[v];
            phi[v] = self.sampling.coords().phi()[v];
        }
        CurvilinearCoords::new(*domain, eta, phi)
    }

    /// One accepted iteration, or `None` when the density can no longer be
    /// lowered at any step size.
    fn iterate(
        &mut self,
        w: &FourierWeights,
        state: &State,
        dt_prev: Option<f64>,
        stage: usize,
        n_max: usize,
        trace: &mut DiffusionTrace,
    ) -> Result<Option<(State, IterationRecord)>> {
        let cfg = self.config;
        let shell = self.sampling.mesh_with(self.coords.shell_points());
        let mass = vertex_mass(&shell)?;
        let (lap, mode) = if cfg.is_anisotropic() {
            let field = DiffusionTensorField::from_mesh(&state.surface, cfg.gamma, cfg.alpha_cap)?;
            let tensors = field.transported(&state.surface, &shell)?;
            (
                laplacian_with_tensors(&shell, &tensors)?,
                DtMode::Aniso {
                    alpha_max: field.max_rate(),
                },
            )
        } else {
            (laplacian_iso(&shell)?, DtMode::Iso)
        };
        let grad = gradient_operator(&shell)?;
        let bc = BoundaryCondition::for_mesh(&shell, state.mean);
        let mut dt = dt_from_edge(shell.mean_edge_length(), mode, cfg.dt_scale);
        if let Some(prev) = dt_prev {
            dt = dt.min(2.0 * prev);
        }
        let shell_normals = face_normals(&shell);
        let surface_normals = face_normals(&state.surface);

        let mut flip_count = 0;
        let mut last = Rejection::StdIncrease;
        for halvings in 0..=cfg.max_halvings {
            let mut system = backward_euler_system(&mass.diagonal, &lap, &state.u, dt)?;
            system.tolerance = cfg.solver_tolerance;
            apply_boundary_abc(&mut system, dt, &bc)?;
            let u_next = conjugate_gradient(&system, Preconditioner::Jacobi, Some(&state.u))?.x;

            let velocity: Vec<Vec3> = vertex_average(&shell, &grad.face_gradients(&u_next))
                .into_iter()
                .map(|g| g / state.mean)
                .collect();
            let coords = self.constrain(&update_coordinates(&self.coords, &velocity, dt)?)?;
            let moved_shell = self.sampling.mesh_with(coords.shell_points());
            let surface = self.reconstruct(w, &coords, trace)?;
            let flips = count_flips(&moved_shell, &shell_normals) + count_flips(&surface, &surface_normals);
            if flips == 0 {
                let next = self.density(surface);
                if next.std <= state.std {
                    let record = IterationRecord {
                        iteration: trace.records.len() + 1,
                        stage,
                        n_max,
                        dt,
                        std_u: next.std,
                        mean_u: next.mean,
                        flip_count,
                        halvings,
                        boundary_length: self.rim_length(&next.surface),
                        basis_evaluations: trace.basis_evaluations,
                    };
                    self.coords = coords;
                    return Ok(Some((next, record)));
                }
                last = Rejection::StdIncrease;
            } else {
                flip_count += flips;
                last = Rejection::Flips;
            }
            dt *= 0.5;
        }
        match last {
            Rejection::StdIncrease => Ok(None),
            Rejection::Flips => Err(Error::FlipRecoveryExhausted {
                iteration: trace.records.len() + 1,
                halvings: cfg.max_halvings,
            }),
        }
    }
}

/// Samples sitting on the pole of a prolate hemispheroid.
///
/// There `ξ = 1 − cos η = 0` is an interior point of the Legendre range, so
/// the `m ≠ 0` terms do not vanish and the reconstruction depends on φ. A
/// vertex leaving the pole would jump between these values; it is kept in
/// place instead.
fn pole_vertices(coords: &CurvilinearCoords) -> Vec<usize> {
    if coords.domain().kind != DomainKind::ProlateHemispheroid {
        return Vec::new();
    }
    (0..coords.len()).filter(|&i| coords.eta()[i] == 0.0).collect()
}

/// Faces whose normal reversed or vanished relative to the reference.
fn count_flips(mesh: &TriangleMesh, reference: &[Vec3]) -> usize {
    face_normals(mesh)
        .iter()
        .zip(reference)
        .filter(|(n, r)| r.norm_squared() > 0.0 && n.dot(r) <= 0.0)
        .count()
}
