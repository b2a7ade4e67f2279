//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any of them fails.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use harmonic_remesh::benchmarks::{bumpy_cap, bumpy_spheroid, protrusion_spheroid};
use harmonic_remesh::contour2d::{decompose_contour, remesh_contour};
use harmonic_remesh::diffusion::{
    diffuse_remesh, run_hierarchical, DiffusionConfig, RemeshResult, ShellSampling, Stage,
};
use harmonic_remesh::harmonics::{
    decompose, reconstruct_fast, reconstruct_full, row_degree_order, weights_to_json, ExpansionConfig, FourierWeights,
};
use harmonic_remesh::mesh::{
    compare_surfaces, face_metrics, face_normals, icosphere, Contour2D, TriangleMesh, Vec2, Vec3,
};
use harmonic_remesh::operators::{face_mass, gradient_operator, laplacian_aniso, laplacian_iso, vertex_mass};
use harmonic_remesh::solver::{backward_euler_step, CsrMatrix};
use harmonic_remesh::spheroidal::{map_to_domain, CurvilinearCoords, DomainKind, SpheroidDomain};

const FAST_FULL_TOL: f64 = 1e-10;
const EXACT_RMS_TOL: f64 = 1e-8;
const EXACT_HIGH_DEGREE_TOL: f64 = 1e-9;
const OPERATOR_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const CONSERVATION_TOL: f64 = 1e-9;
const CLOSED_STD_RATIO: f64 = 1.0 / 3.0;
const AREA_DRIFT: f64 = 0.01;
const RIM_DRIFT: f64 = 0.01;
const MEAN_U_DRIFT: f64 = 0.02;
const STAGED_STD_SLACK: f64 = 0.10;
const STAGED_COST_RATIO: f64 = 0.60;
const RHO_INVERSION: f64 = 0.005;
const CONTOUR_STD_RATIO: f64 = 0.20;
const CONTOUR_DRIFT: f64 = 0.01;
const SURFACE_DISTANCE: f64 = 0.05;
const EQUILATERAL_TOL: f64 = 1e-12;

type Verdict = (bool, String);

fn random_weights(rng: &mut StdRng, domain: SpheroidDomain, n_max: usize) -> FourierWeights {
    let mut w = FourierWeights::zeros(domain, n_max).unwrap();
    for n in 0..=n_max {
        for m in 0..=n as i64 {
            let v = [(); 3].map(|_| {
                let im = if m == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                Complex64::new(rng.random_range(-1.0..1.0), im)
            });
            w.set(n, m, v);
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                w.set(n, -m, v.map(|c| c.conj() * sign));
            }
        }
    }
    w
}

fn fast_matches_full() -> Verdict {
    let mut rng = StdRng::seed_from_u64(20);
    let domain = SpheroidDomain::from_semi_axes(1.0, 1.3, false).unwrap();
    let (lo, hi) = domain.eta_range();
    let mut worst = 0.0f64;
    let t = Instant::now();
    for n_max in [5, 10, 25] {
        let w = random_weights(&mut rng, domain, n_max);
        let eta: Vec<f64> = (0..500).map(|_| rng.random_range(lo..=hi)).collect();
        let phi: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..TAU)).collect();
        let c = CurvilinearCoords::new(domain, eta, phi).unwrap();
        let a = reconstruct_fast(&w, &c).unwrap();
        let b = reconstruct_full(&w, &c).unwrap();
        for (p, q) in a.iter().zip(&b) {
            worst = worst.max((p - q).amax());
        }
    }
    (
        worst <= FAST_FULL_TOL,
        format!("max |fast - full| {worst:.2e} in {:.2?}", t.elapsed()),
    )
}

fn spheroid_is_exact() -> Verdict {
    let domain = SpheroidDomain::new(DomainKind::Oblate, 1.0, 1.0).unwrap();
    let ico = icosphere(3).unwrap();
    let (a, c) = domain.semi_axes();
    let shell = ico.with_vertices(
        ico.vertices()
            .iter()
            .map(|p| Vec3::new(a * p.x, a * p.y, c * p.z))
            .collect(),
    );
    let coords = map_to_domain(&shell, &domain).unwrap();
    let dec = decompose(&shell, &coords, ExpansionConfig::new(2).unwrap()).unwrap();
    let rows = dec.weights.rows();
    let scale = rows.iter().flat_map(|r| r.iter().map(|c| c.norm())).fold(0.0, f64::max);
    let high = rows
        .iter()
        .enumerate()
        .filter(|(k, _)| row_degree_order(*k).0 > 1)
        .flat_map(|(_, r)| r.iter().map(|c| c.norm()))
        .fold(0.0, f64::max)
        / scale;
    let rec = reconstruct_fast(&dec.weights, &coords).unwrap();
    let rms = (rec
        .iter()
        .zip(shell.vertices())
        .map(|(p, q)| (p - q).norm_squared())
        .sum::<f64>()
        / rec.len() as f64)
        .sqrt();
    (
        rms < EXACT_RMS_TOL && high < EXACT_HIGH_DEGREE_TOL,
        format!("rms {rms:.2e}, largest degree-2 weight {high:.2e} relative"),
    )
}

fn sampled(weights: &FourierWeights, refine: usize) -> (ShellSampling, TriangleMesh) {
    let s = ShellSampling::icosphere(weights.domain(), refine).unwrap();
    let m = s.mesh_with(reconstruct_fast(weights, s.coords()).unwrap());
    (s, m)
}

/// Cotangent weights assembled from interior angles.
fn angle_oracle(mesh: &TriangleMesh) -> HashMap<(usize, usize), f64> {
    let mut l = HashMap::new();
    let p = mesh.vertices();
    for f in mesh.faces() {
        for k in 0..3 {
            let (i, j, o) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            let (a, b) = (p[i] - p[o], p[j] - p[o]);
            let w = 0.5 / a.cross(&b).norm().atan2(a.dot(&b)).tan();
            *l.entry((i, j)).or_insert(0.0) += w;
            *l.entry((j, i)).or_insert(0.0) += w;
            *l.entry((i, i)).or_insert(0.0) -= w;
            *l.entry((j, j)).or_insert(0.0) -= w;
        }
    }
    l
}

/// `−Gᵀ A G`, accumulated row by row of the gradient.
fn weak_form(mesh: &TriangleMesh) -> HashMap<(usize, usize), f64> {
    let g = gradient_operator(mesh).unwrap().matrix;
    let a = face_mass(mesh).unwrap().diagonal;
    let mut l = HashMap::new();
    for (r, &ar) in a.iter().enumerate() {
        let (cols, vals) = g.row(r);
        for (&i, &gi) in cols.iter().zip(vals) {
            for (&j, &gj) in cols.iter().zip(vals) {
                *l.entry((i, j)).or_insert(0.0) -= ar * gi * gj;
            }
        }
    }
    l
}

fn max_gap(a: &HashMap<(usize, usize), f64>, b: &CsrMatrix) -> f64 {
    let mut worst = 0.0f64;
    for (i, j, v) in b.triplets() {
        worst = worst.max((a.get(&(i, j)).copied().unwrap_or(0.0) - v).abs());
    }
    for (&(i, j), v) in a {
        worst = worst.max((b.get(i, j) - v).abs());
    }
    worst
}

fn operator_suite() -> Verdict {
    let mut meshes: Vec<(String, TriangleMesh)> = (2..=4)
        .map(|r| (format!("icosphere({r})"), icosphere(r).unwrap()))
        .collect();
    meshes.push(("bumpy".into(), sampled(&bumpy_spheroid(30).unwrap(), 3).1));
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, mesh) in &meshes {
        let l = laplacian_iso(mesh).unwrap();
        let asym = l.asymmetry();
        let rows = l.row_sums().iter().fold(0.0f64, |m, r| m.max(r.abs()));
        // λ_min(−L) > −δ exactly when −L + δI admits a Cholesky factor.
        let shifted = l.scaled_plus_diagonal(-1.0, &vec![PSD_TOL; mesh.n_v()]).to_dense();
        let psd = shifted.cholesky().is_some();
        let weak = max_gap(&weak_form(mesh), &l);
        let oracle = angle_oracle(mesh);
        let cot = max_gap(&oracle, &l);
        let mut weak_vs_oracle = 0.0f64;
        for (k, v) in weak_form(mesh) {
            weak_vs_oracle = weak_vs_oracle.max((oracle.get(&k).copied().unwrap_or(0.0) - v).abs());
        }
        let pass = asym == 0.0
            && rows < OPERATOR_TOL
            && psd
            && weak < OPERATOR_TOL
            && cot < OPERATOR_TOL
            && weak_vs_oracle < OPERATOR_TOL;
        ok &= pass;
        notes.push(format!("{name}: rows {rows:.0e} weak {weak_vs_oracle:.0e} psd {psd}"));
    }
    (ok, notes.join("; "))
}

fn conservation() -> Verdict {
    let (_, mesh) = sampled(&bumpy_spheroid(20).unwrap(), 3);
    let l = laplacian_iso(&mesh).unwrap();
    let m = vertex_mass(&mesh).unwrap().diagonal;
    let mut u: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| 1.0 + 0.5 * (3.0 * p.x).sin() * p.y)
        .collect();
    let total = |u: &[f64]| u.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>();
    let start = total(&u);
    let dt = 0.1 * mesh.mean_edge_length().powi(2);
    for _ in 0..30 {
        u = backward_euler_step(&m, &l, &u, dt).unwrap();
    }
    let drift = (total(&u) - start).abs() / start.abs();
    (
        drift < CONSERVATION_TOL,
        format!("relative change {drift:.2e} over 30 steps"),
    )
}

struct ClosedRun {
    weights: FourierWeights,
    before: TriangleMesh,
    result: RemeshResult,
}

fn closed_run() -> ClosedRun {
    let weights = bumpy_spheroid(30).unwrap();
    let (s, before) = sampled(&weights, 4);
    let result = diffuse_remesh(&weights, &s, &DiffusionConfig::with_stages(vec![Stage::new(30, 50)])).unwrap();
    ClosedRun {
        weights,
        before,
        result,
    }
}

fn closed_remeshing(run: &ClosedRun, seconds: f64) -> Verdict {
    let t = &run.result.trace;
    let ratio = t.final_std_u() / t.initial_std_u;
    let area = (run.result.mesh.total_area() / run.before.total_area() - 1.0).abs();
    let n0 = face_normals(&run.before);
    let flips = face_normals(&run.result.mesh)
        .iter()
        .zip(&n0)
        .filter(|(a, b)| a.dot(b) <= 0.0)
        .count()
        + t.records.iter().map(|r| r.flip_count).sum::<usize>();
    let mut monotone = true;
    let mut last = t.initial_std_u;
    for r in &t.records {
        monotone &= r.std_u <= last;
        last = r.std_u;
    }
    (
        ratio <= CLOSED_STD_RATIO && area <= AREA_DRIFT && flips == 0 && monotone,
        format!(
            "std ratio {ratio:.3}, area drift {area:.2e}, flips {flips}, monotone {monotone}, {} iterations in {seconds:.1} s",
            t.records.len()
        ),
    )
}

fn open_surface() -> Verdict {
    let w = bumpy_cap(25).unwrap();
    let s = ShellSampling::for_domain(w.domain(), 5, 1e-3).unwrap();
    let r = diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(25, 100)])).unwrap();
    let rim = r.mesh.boundary_length() / r.trace.initial_boundary_length.unwrap() - 1.0;
    let mean = r.trace.final_mean_u() / r.trace.initial_mean_u - 1.0;
    (
        rim.abs() <= RIM_DRIFT && mean.abs() <= MEAN_U_DRIFT,
        format!(
            "rim length drift {rim:+.2e}, mean density drift {mean:+.2e}, std {:.2e} -> {:.2e}",
            r.trace.initial_std_u,
            r.trace.final_std_u()
        ),
    )
}

fn hierarchical() -> Verdict {
    let w = bumpy_spheroid(50).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 4).unwrap();
    let single = diffuse_remesh(&w, &s, &DiffusionConfig::with_stages(vec![Stage::new(50, 30)])).unwrap();
    let staged = run_hierarchical(
        &w,
        &s,
        &DiffusionConfig::with_stages(vec![Stage::new(30, 25), Stage::new(50, 7)]),
    )
    .unwrap();
    let (a, b) = (staged.trace.final_std_u(), single.trace.final_std_u());
    let cost = staged.trace.basis_evaluations as f64 / single.trace.basis_evaluations as f64;
    (
        a <= (1.0 + STAGED_STD_SLACK) * b && cost <= STAGED_COST_RATIO,
        format!("final std staged {a:.3e} vs single {b:.3e}, basis evaluations ratio {cost:.3}"),
    )
}

fn mean_rho_hat(mesh: &TriangleMesh) -> f64 {
    let fm = face_metrics(mesh);
    let v: Vec<f64> = fm
        .circumradius_hat
        .iter()
        .zip(&fm.degenerate)
        .filter(|(_, d)| !**d)
        .map(|(r, _)| *r)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn anisotropy(outputs: &mut Vec<TriangleMesh>) -> Verdict {
    let w = protrusion_spheroid(30).unwrap();
    let s = ShellSampling::icosphere(w.domain(), 4).unwrap();
    let mut rho = Vec::new();
    let mut std = Vec::new();
    for gamma in [1.0, 50.0, 250.0] {
        let mut cfg = DiffusionConfig::with_stages(vec![Stage::new(30, 50)]);
        cfg.gamma = gamma;
        let r = diffuse_remesh(&w, &s, &cfg).unwrap();
        rho.push(mean_rho_hat(&r.mesh));
        std.push(r.trace.final_std_u());
        outputs.push(r.mesh);
    }
    let inversions: Vec<f64> = rho
        .windows(2)
        .filter(|p| p[1] > p[0])
        .map(|p| (p[1] - p[0]) / p[0])
        .collect();
    let rho_ok = inversions.len() <= 1 && inversions.iter().all(|&x| x <= RHO_INVERSION);
    let std_ok = std.windows(2).all(|p| p[1] >= p[0]);

    let ico = icosphere(0).unwrap();
    let iso = laplacian_iso(&ico).unwrap().to_dense();
    let eq = [1.0, 50.0, 250.0]
        .iter()
        .map(|&g| (laplacian_aniso(&ico, g).unwrap().to_dense() - &iso).amax())
        .fold(0.0, f64::max);
    (
        rho_ok && std_ok && eq <= OPERATOR_TOL,
        format!(
            "mean rho_hat {:.5}/{:.5}/{:.5}, final std {:.3e}/{:.3e}/{:.3e}, equilateral gap {eq:.0e}",
            rho[0], rho[1], rho[2], std[0], std[1], std[2]
        ),
    )
}

fn contours() -> Verdict {
    let n = 400;
    let sample =
        |f: &dyn Fn(f64) -> Vec2| Contour2D::new((0..n).map(|k| f(TAU * k as f64 / n as f64)).collect(), true).unwrap();
    let ellipse = sample(&|t| Vec2::new(3.0 * t.cos(), 0.4 * t.sin()));
    let blob = sample(&|t| {
        let r = 1.0 + 0.3 * (3.0 * t).cos() + 0.15 * (5.0 * t + 0.4).sin();
        Vec2::new(1.6 * r * t.cos() + 0.5, r * t.sin())
    });
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, c) in [("ellipse", ellipse), ("blob", blob)] {
        let fit = decompose_contour(&c, 15).unwrap();
        let r = remesh_contour(&fit.weights, 64, 200).unwrap();
        let ratio = r.final_std() / r.initial_std;
        let length = (r.contour.length() / r.initial_length - 1.0).abs();
        let mean = r.contour.length() / 64.0;
        let spacing = (mean / r.initial_mean - 1.0).abs();
        ok &= ratio <= CONTOUR_STD_RATIO && length <= CONTOUR_DRIFT && spacing <= CONTOUR_DRIFT;
        notes.push(format!(
            "{name}: std ratio {ratio:.3}, length drift {length:.1e}, spacing drift {spacing:.1e}"
        ));
    }
    (ok, notes.join("; "))
}

fn morphology(run: &ClosedRun, weights_before: &str) -> Verdict {
    let d = compare_surfaces(&run.before, &run.result.mesh);
    let rel = d.mean_nearest_distance / run.before.mean_edge_length();
    let same = weights_to_json(&run.weights) == weights_before;
    (
        rel <= SURFACE_DISTANCE && same,
        format!("mean distance {rel:.2e} of the mean edge length, weights unchanged {same}"),
    )
}

fn metric_sanity(meshes: &[TriangleMesh]) -> Verdict {
    let mut counts = true;
    for r in 0..=5 {
        let m = icosphere(r).unwrap();
        let p = 4usize.pow(r as u32);
        counts &= (m.n_v(), m.n_f()) == (10 * p + 2, 20 * p);
    }
    let r5 = icosphere(5).unwrap();
    counts &= (r5.n_v(), r5.n_f()) == (10_242, 20_480);

    let tri = TriangleMesh::new(
        vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let eq = face_metrics(&tri).circumradius_hat[0];
    let ico = face_metrics(&icosphere(0).unwrap()).circumradius_hat;
    let eq_gap = ico.iter().chain([&eq]).map(|r| (r - 1.0).abs()).fold(0.0, f64::max);

    let (mut lo, mut hi, mut faces) = (f64::INFINITY, 0.0f64, 0usize);
    for m in meshes {
        let fm = face_metrics(m);
        for (r, d) in fm.circumradius_hat.iter().zip(&fm.degenerate) {
            if !d {
                lo = lo.min(*r);
                hi = hi.max(*r);
                faces += 1;
            }
        }
    }
    // 1 itself is only reached up to rounding.
    let in_range = lo >= 1.0 - EQUILATERAL_TOL && hi < 2.0;
    (
        counts && eq_gap <= EQUILATERAL_TOL && in_range,
        format!("counts {counts}, equilateral gap {eq_gap:.0e}, rho_hat in [{lo:.6}, {hi:.4}] over {faces} faces"),
    )
}

fn report(id: usize, title: &str, verdict: Verdict, failures: &mut usize) {
    let (pass, detail) = verdict;
    if !pass {
        *failures += 1;
    }
    println!(
        "criterion {id:>2} {} {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn main() {
    let mut failures = 0;
    report(
        1,
        "fast and full reconstruction agree",
        fast_matches_full(),
        &mut failures,
    );
    report(
        2,
        "spheroid shell is exact at degree one",
        spheroid_is_exact(),
        &mut failures,
    );
    report(3, "discrete operators", operator_suite(), &mut failures);
    report(4, "backward Euler conserves mass", conservation(), &mut failures);

    let start = Instant::now();
    let run = closed_run();
    let seconds = start.elapsed().as_secs_f64();
    let weights_before = weights_to_json(&run.weights);
    report(
        5,
        "closed surface remeshing",
        closed_remeshing(&run, seconds),
        &mut failures,
    );
    report(6, "open surface fidelity", open_surface(), &mut failures);
    report(7, "hierarchical schedule", hierarchical(), &mut failures);
    let mut aniso_meshes = Vec::new();
    report(8, "anisotropy trade-off", anisotropy(&mut aniso_meshes), &mut failures);
    report(9, "contour remeshing", contours(), &mut failures);
    report(
        10,
        "morphology preservation",
        morphology(&run, &weights_before),
        &mut failures,
    );

    let mut meshes: Vec<TriangleMesh> = (0..=5).map(|r| icosphere(r).unwrap()).collect();
    meshes.push(run.before.clone());
    meshes.push(run.result.mesh.clone());
    meshes.extend(aniso_meshes);
    report(11, "metric sanity", metric_sanity(&meshes), &mut failures);

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
