//! Remeshing by diffusion of the shell coordinates.
//!
//! The reconstruction's normalized Voronoi areas `u` are diffused on the
//! shell mesh with backward Euler, and every vertex is advected along the
//! gradient of the smoothed density, then pulled back onto the shell. The
//! harmonic weights stay fixed, so only the sampling of the surface moves.
//! Steps that flip a face or raise the spread of `u` are retried at half
//! the time step.

mod boundary;
mod config;
mod engine;
mod sampling;

pub use boundary::{apply_boundary_abc, BoundaryCondition, BoundaryKind};
pub use config::{DiffusionConfig, DiffusionTrace, IterationRecord, Stage, DEFAULT_DT_SCALE};
pub use engine::{diffuse_remesh, run_hierarchical, run_into, update_coordinates, RemeshResult};
pub use sampling::ShellSampling;
