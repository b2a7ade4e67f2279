//! `harmonic-remesh` command-line frontend.
//!
//! Exit codes: 0 success, 1 io and other failures, 2 parse errors, 3
//! topology errors, 4 engine errors, 5 resource guards.

mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use harmonic_remesh::contour2d::{remesh_microstructure_2d, write_particles, Particle, ParticleRemesh};
use harmonic_remesh::diffusion::{run_into, DiffusionTrace, ShellSampling};
use harmonic_remesh::harmonics::{beta, fit_and_decompose, load_weights, reconstruct_fast, save_weights};
use harmonic_remesh::mesh::{compare_surfaces, load_mesh, save_mesh, MeshFormat, QualityReport, TriangleMesh};
use harmonic_remesh::{Error, ErrorClass};

use config::{parse_stages, FileConfig};

#[derive(Parser)]
#[command(
    name = "harmonic-remesh",
    version,
    about = "Morphology-preserving remeshing through spheroidal harmonics"
)]
struct Cli {
    /// TOML file with per-command defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a shell to a mesh and write its harmonic weights.
    Decompose(DecomposeArgs),
    /// Resample a surface by area-density diffusion.
    Remesh(RemeshArgs),
    /// Remesh a set of planar particle contours.
    Remesh2d(Remesh2dArgs),
    /// Quality report of a mesh.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Required for open meshes.
    #[arg(long)]
    hemispheroid: bool,
}

#[derive(Args)]
struct RemeshArgs {
    /// Weights file written by `decompose`.
    #[arg(long, conflicts_with = "mesh")]
    weights: Option<PathBuf>,
    /// Mesh to decompose first, at the largest stage degree.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Icosphere refinement, or log2 of the ring count for open shells.
    #[arg(long)]
    refine: Option<usize>,
    /// Schedule as `nmax:imax,...`.
    #[arg(long)]
    stages: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    dt_scale: Option<f64>,
    #[arg(long)]
    eps_eta: Option<f64>,
}

#[derive(Args)]
struct Remesh2dArgs {
    /// JSON particle document.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-particle CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    max_segments: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    imax: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Second mesh whose report is compared against the first.
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long)]
    faces: Option<PathBuf>,
    #[arg(long)]
    vertices: Option<PathBuf>,
}

/// Failure of a command, with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Io => 1,
            ErrorClass::Parse => 2,
            ErrorClass::Topology => 3,
            ErrorClass::Engine => 4,
            ErrorClass::Guard => 5,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Decompose(a) => decompose(a, &file),
        Command::Remesh(a) => remesh(a, &file),
        Command::Remesh2d(a) => remesh2d(a, &file),
        Command::Metrics(a) => metrics(a, &file),
    }
}

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf, Failure> {
    value.ok_or_else(|| usage(format!("missing --{flag}")))
}

fn mesh_format(path: &Path) -> Result<MeshFormat, Failure> {
    MeshFormat::from_path(path).ok_or_else(|| usage(format!("unknown mesh format for {}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: 1,
        message: format!("cannot create {}: {e}", path.display()),
    })
}

fn read_mesh(path: &Path) -> Result<TriangleMesh, Failure> {
    Ok(load_mesh(path, mesh_format(path)?)?)
}

fn decompose(a: DecomposeArgs, file: &FileConfig) -> CmdResult {
    let f = &file.decompose;
    let input = required(a.input.or(f.input.clone()), "in")?;
    let out = required(a.out.or(f.out.clone()), "out")?;
    let n_max = a.nmax.or(f.nmax).unwrap_or(30);
    let hemi = a.hemispheroid || f.hemispheroid.unwrap_or(false);

    let mesh = read_mesh(&input)?;
    if !mesh.is_closed() && !hemi {
        return Err(Error::Topology("open mesh; pass --hemispheroid to fit a hemispheroidal shell".into()).into());
    }
    let dec = fit_and_decompose(&mesh, n_max, None)?;
    save_weights(&dec.weights, &out)?;
    println!(
        "domain {:?}  n_max {n_max}  beta {}  residual_rms {:e}",
        dec.weights.domain().kind,
        beta(n_max),
        dec.residual_rms
    );
    Ok(())
}

fn remesh(a: RemeshArgs, file: &FileConfig) -> CmdResult {
    let f = &file.remesh;
    let out = required(a.out.or(f.out.clone()), "out")?;
    let trace_path = a.trace.or(f.trace.clone());
    let mut cfg = harmonic_remesh::diffusion::DiffusionConfig::default();
    if let Some(s) = a.stages.as_deref().or(f.stages.as_deref()) {
        cfg.stages = parse_stages(s).map_err(usage)?;
    }
    if let Some(g) = a.gamma.or(f.gamma) {
        cfg.gamma = g;
    }
    if let Some(c) = a.dt_scale.or(f.dt_scale) {
        cfg.dt_scale = c;
    }
    if let Some(e) = a.eps_eta.or(f.eps_eta) {
        cfg.eps_eta = e;
    }
    cfg.validate()?;
    let refine = a.refine.or(f.refine).unwrap_or(4);
    let top = cfg.stages.last().map_or(0, |s| s.n_max);

    let weights = match (a.weights.or(f.weights.clone()), a.mesh.or(f.mesh.clone())) {
        (Some(w), _) => load_weights(&w)?,
        (None, Some(m)) => fit_and_decompose(&read_mesh(&m)?, top, None)?.weights,
        (None, None) => return Err(usage("one of --weights or --mesh is required")),
    };
    let sampling = ShellSampling::for_domain(weights.domain(), refine, cfg.eps_eta)?;
    let initial = sampling.mesh_with(reconstruct_fast(
        &weights.truncated(top.min(weights.n_max())),
        sampling.coords(),
    )?);

    let mut trace = DiffusionTrace::default();
    let outcome = run_into(&weights, &sampling, &cfg, &mut trace);
    if let Some(p) = &trace_path {
        trace.write_csv(create(p)?)?;
    }
    let (_, mesh) = outcome?;
    save_mesh(&mesh, &out, mesh_format(&out)?)?;

    let flips: usize = trace.records.iter().map(|r| r.flip_count).sum();
    let area_drift = mesh.total_area() / initial.total_area() - 1.0;
    println!(
        "iterations {}  std_u {:e} -> {:e}  area_drift {:+.3e}  rejected_flips {flips}  basis_evaluations {}",
        trace.records.len(),
        trace.initial_std_u,
        trace.final_std_u(),
        area_drift,
        trace.basis_evaluations
    );
    Ok(())
}

fn remesh2d(a: Remesh2dArgs, file: &FileConfig) -> CmdResult {
    let f = &file.remesh2d;
    let input = required(a.input.or(f.input.clone()), "in")?;
    let out = required(a.out.or(f.out.clone()), "out")?;
    let max_segments = a.max_segments.or(f.max_segments).unwrap_or(64);
    let n_max = a.nmax.or(f.nmax).unwrap_or(30);
    let i_max = a.imax.or(f.imax).unwrap_or(100);

    let particles = harmonic_remesh::contour2d::load_particles(&input)?;
    let results = remesh_microstructure_2d(&particles, max_segments, n_max, i_max)?;
    let remeshed: Vec<Particle> = results
        .iter()
        .map(|r| Particle {
            id: r.id,
            contour: r.remesh.contour.clone(),
        })
        .collect();
    std::fs::write(&out, write_particles(&remeshed)).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", out.display()),
    })?;
    if let Some(p) = a.report.or(f.report.clone()) {
        write_particle_report(&results, create(&p)?)?;
    }
    let worst = results
        .iter()
        .map(|r| r.remesh.final_std() / r.remesh.initial_std.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    println!(
        "particles {}  segments {}..{}  worst spacing std ratio {worst:.3}",
        results.len(),
        results.iter().map(|r| r.segments).min().unwrap_or(0),
        results.iter().map(|r| r.segments).max().unwrap_or(0),
    );
    Ok(())
}

fn write_particle_report(results: &[ParticleRemesh], w: impl std::io::Write) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    let mut rows = || -> csv::Result<()> {
        out.write_record([
            "id",
            "segments",
            "n_max",
            "residual_rms",
            "input_length",
            "length",
            "initial_std",
            "final_std",
            "iterations",
        ])?;
        for r in results {
            out.serialize((
                r.id,
                r.segments,
                r.n_max,
                r.residual_rms,
                r.input_length,
                r.remesh.contour.length(),
                r.remesh.initial_std,
                r.remesh.final_std(),
                r.remesh.trace.len(),
            ))?;
        }
        out.flush()?;
        Ok(())
    };
    rows().map_err(|e| Error::InvalidInput(format!("report: {e}")))
}

fn metrics(a: MetricsArgs, file: &FileConfig) -> CmdResult {
    let f = &file.metrics;
    let input = required(a.input.or(f.input.clone()), "in")?;
    let mesh = read_mesh(&input)?;
    let report = QualityReport::new(&mesh)?;
    if let Some(p) = a.faces.or(f.faces.clone()) {
        report.write_face_csv(create(&p)?)?;
    }
    if let Some(p) = a.vertices.or(f.vertices.clone()) {
        report.write_vertex_csv(create(&p)?)?;
    }
    print_report(&input, &report);
    if let Some(other) = a.compare.or(f.compare.clone()) {
        let other_mesh = read_mesh(&other)?;
        let other_report = QualityReport::new(&other_mesh)?;
        print_report(&other, &other_report);
        let d = compare_surfaces(&mesh, &other_mesh);
        println!(
            "delta  std_u {:+e}  mean_rho_hat {:+.6}  area {:+e}  mean_distance {:e}",
            other_report.std_u - report.std_u,
            other_report.mean_rho_hat - report.mean_rho_hat,
            d.total_area_b - d.total_area_a,
            d.mean_nearest_distance
        );
    }
    Ok(())
}

fn print_report(path: &Path, r: &QualityReport) {
    println!(
        "{}: faces {}  mean_u {:e}  std_u {:e}  mean_rho_hat {:.6}  degenerate {}",
        path.display(),
        r.face_areas.len(),
        r.mean_u,
        r.std_u,
        r.mean_rho_hat,
        r.degenerate_faces.len()
    );
    let counts: Vec<String> = r.rho_hat_histogram.counts.iter().map(|c| c.to_string()).collect();
    println!("rho_hat histogram [1, 2): {}", counts.join(" "));
}
