use harmonic_remesh::benchmarks::{bumpy_cap, bumpy_spheroid};
use harmonic_remesh::diffusion::{
    apply_boundary_abc, diffuse_remesh, run_hierarchical, update_coordinates, BoundaryCondition, BoundaryKind,
    DiffusionConfig, ShellSampling, Stage,
};
use harmonic_remesh::harmonics::reconstruct_fast;
use harmonic_remesh::mesh::{face_normals, hex_disk, Vec3};
use harmonic_remesh::operators::{laplacian_iso, vertex_mass};
use harmonic_remesh::solver::{backward_euler_system, solve_sparse, Preconditioner};
use harmonic_remesh::Error;

#[test]
fn closed_run_is_monotone_and_flip_free() {
    let w = bumpy_spheroid(12).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 3).unwrap();
    let before = s.mesh_with(reconstruct_fast(&w, s.coords()).unwrap());
    let r = diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(12, 20)])).unwrap();

    let t = &r.trace;
    assert!(!t.records.is_empty());
    let mut last = t.initial_std_u;
    for rec in &t.records {
        assert!(rec.std_u <= last, "iteration {}: {} > {last}", rec.iteration, rec.std_u);
        assert_eq!(rec.flip_count, 0);
        last = rec.std_u;
    }
    assert!(t.final_std_u() < t.initial_std_u);
    assert!(t.basis_evaluations > 0);

    // Same surface, so the area barely moves and no face turns over.
    let drift = (r.mesh.total_area() / before.total_area() - 1.0).abs();
    assert!(drift < 0.01, "{drift}");
    let n0 = face_normals(&before);
    assert!(face_normals(&r.mesh).iter().zip(&n0).all(|(a, b)| a.dot(b) > 0.0));
}

#[test]
fn runs_are_deterministic() {
    let w = bumpy_spheroid(10).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 2).unwrap();
    let cfg = DiffusionConfig::with_stages(vec![Stage::new(6, 3), Stage::new(10, 3)]);
    let a = run_hierarchical(&w, &s, &cfg).unwrap();
    let b = run_hierarchical(&w, &s, &cfg).unwrap();
    assert_eq!(a.mesh.vertices(), b.mesh.vertices());
    assert_eq!(a.trace.stage_starts, b.trace.stage_starts);
    assert_eq!(a.trace.stage_starts.len(), 2);
}

#[test]
fn hierarchical_needs_two_stages() {
    let w = bumpy_spheroid(8).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 1).unwrap();
    let err = run_hierarchical(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(8, 2)]));
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

#[test]
fn stage_degree_above_the_weights_is_rejected() {
    let w = bumpy_spheroid(8).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 1).unwrap();
    assert!(diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(9, 2)])).is_err());
}

#[test]
fn config_validation() {
    assert!(DiffusionConfig::default().validate().is_ok());
    let with = |f: fn(&mut DiffusionConfig)| {
        let mut c = DiffusionConfig::default();
        f(&mut c);
        c.validate()
    };
    assert!(with(|c| c.stages.clear()).is_err());
    assert!(with(|c| c.stages = vec![Stage::new(20, 5), Stage::new(20, 5)]).is_err());
    assert!(with(|c| c.stages = vec![Stage::new(20, 0)]).is_err());
    assert!(matches!(
        with(|c| c.stages = vec![Stage::new(10_000, 1)]),
        Err(Error::Guard { .. })
    ));
    assert!(with(|c| c.gamma = -1.0).is_err());
    assert!(with(|c| c.dt_scale = 0.0).is_err());
    assert!(with(|c| c.eps_eta = 0.0).is_err());
    assert!(with(|c| c.alpha_cap = 0.5).is_err());
    assert!(with(|c| c.gamma = 50.0).is_ok());
}

#[test]
fn open_cap_keeps_its_rim() {
    // Low degrees resolve the rim poorly and the mean density then drifts
    // by several percent; degree 25 keeps it near one.
    let w = bumpy_cap(25).unwrap();
    let s = ShellSampling::for_domain(w.domain(), 4, 1e-3).unwrap();
    let rim = s.boundary().len();
    assert!(rim > 0);
    let r = diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(25, 15)])).unwrap();
    assert_eq!(r.mesh.boundary_loop().len(), rim);

    let l0 = r.trace.initial_boundary_length.unwrap();
    let l1 = r.mesh.boundary_length();
    assert!((l1 / l0 - 1.0).abs() < 0.01, "{l0} -> {l1}");
    assert!(r.trace.records.iter().all(|rec| rec.boundary_length.is_some()));
    let mean_drift = (r.trace.final_mean_u() / r.trace.initial_mean_u - 1.0).abs();
    assert!(mean_drift < 0.02, "{mean_drift}");
}

#[test]
fn rim_flux_leaves_a_uniform_density_alone() {
    let disk = hex_disk(5).unwrap();
    let bowl: Vec<Vec3> = disk
        .vertices()
        .iter()
        .map(|p| p + Vec3::z() * 0.3 * p.norm_squared())
        .collect();
    let mesh = disk.with_vertices(bowl);
    let l = laplacian_iso(&mesh).unwrap();
    let m = vertex_mass(&mesh).unwrap().diagonal;
    let u = vec![0.7; mesh.n_v()];

    let bc = BoundaryCondition::for_mesh(&mesh, 0.7);
    assert_eq!(bc.kind, BoundaryKind::NeumannAveragedFlux);
    bc.check(&mesh).unwrap();
    let mut sys = backward_euler_system(&m, &l, &u, 0.05).unwrap();
    apply_boundary_abc(&mut sys, 0.05, &bc).unwrap();
    let x = solve_sparse(&sys, Preconditioner::Jacobi).unwrap().x;
    assert!(x.iter().all(|v| (v - 0.7).abs() < 1e-9));

    // A lower rim target pulls density out through the rim only.
    let low = BoundaryCondition { mean_u: 0.2, ..bc };
    let mut sys = backward_euler_system(&m, &l, &u, 0.05).unwrap();
    apply_boundary_abc(&mut sys, 0.05, &low).unwrap();
    let x = solve_sparse(&sys, Preconditioner::Jacobi).unwrap().x;
    let mass = |v: &[f64]| v.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>();
    assert!(mass(&x) < mass(&u));
}

#[test]
fn closed_condition_is_a_no_op() {
    let mesh = harmonic_remesh::mesh::icosphere(1).unwrap();
    let bc = BoundaryCondition::for_mesh(&mesh, 1.0);
    assert_eq!(bc, BoundaryCondition::closed());
    let l = laplacian_iso(&mesh).unwrap();
    let m = vertex_mass(&mesh).unwrap().diagonal;
    let mut sys = backward_euler_system(&m, &l, &vec![1.0; mesh.n_v()], 0.1).unwrap();
    let before = sys.matrix.clone();
    apply_boundary_abc(&mut sys, 0.1, &bc).unwrap();
    assert_eq!(sys.matrix, before);
    assert!(BoundaryCondition::closed().check(&hex_disk(2).unwrap()).is_err());
}

#[test]
fn zero_gradient_keeps_coordinates() {
    let w = bumpy_spheroid(4).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 1).unwrap();
    let c = s.coords();
    let moved = update_coordinates(c, &vec![Vec3::zeros(); c.len()], 1.0).unwrap();
    for (a, b) in moved.shell_points().iter().zip(c.shell_points()) {
        assert!((a - b).norm() < 1e-12);
    }
    assert!(update_coordinates(c, &[Vec3::zeros()], 1.0).is_err());
}

#[test]
fn trace_csv_has_one_row_per_iteration() {
    let w = bumpy_spheroid(8).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 2).unwrap();
    let r = diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(8, 4)])).unwrap();
    let mut buf = Vec::new();
    r.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + r.trace.records.len());
}
