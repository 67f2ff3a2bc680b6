use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use willmore::biharmonic::{self, AnnulusBVP};
use willmore::constructors::{
    self, glue_handle_into_disk, make_clifford_torus, make_inverted_torus, make_truncated_inverted_torus,
    CliffordParams, GlueHandle, GlueParams, InvertedTorusParams, StarCurve, TruncationParams,
};
use willmore::minimizer::{self, BoundaryMode, GradientMode, MinimizeOptions};
use willmore::moebius::{self, MoebiusMap};
use willmore::monotonicity;
use willmore::{energies, load_mesh, save_mesh, Circle, ConstraintCurve, MeshFormat, TriMesh, Vec3};

/// Discrete Willmore energy toolkit.
#[derive(Parser)]
#[command(name = "willmore", version)]
struct Cli {
    /// Fixed reduction order and a single worker, for byte-identical baselines.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print W, D, G, total Gauss curvature, χ and the Gauss–Bonnet residual as JSON.
    Energy { mesh: PathBuf },
    /// Build a mesh; writes the mesh and a `.json` record of its parameters.
    Construct(ConstructArgs),
    /// Apply a Möbius map (JSON chain of primitives) to a mesh.
    Transform {
        map: PathBuf,
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Minimum vertex distance to the singular point, as a fraction of the diameter.
        #[arg(long, default_value_t = moebius::DEFAULT_GUARD)]
        guard: f64,
    },
    /// Gradient descent with the boundary held on a circle.
    Minimize(MinimizeArgs),
    /// Monotonicity profile A(ρ) as CSV.
    Monotonicity {
        mesh: PathBuf,
        #[arg(long, value_parser = parse_vec3)]
        center: Vec3,
        /// Comma-separated increasing radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the clamped biharmonic problem on an annulus.
    Biharmonic {
        bvp: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the graph of the solution as a mesh.
        #[arg(long)]
        cap: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        n_angular: usize,
        #[arg(long, default_value_t = 64)]
        n_rings: usize,
    },
    /// Bending-energy concentration candidates as JSON.
    Badpoints {
        mesh: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Energy drop under inversion about a point. Closed meshes use the point as the
    /// inversion centre; for meshes with boundary it must be a boundary vertex.
    InvertCheck {
        mesh: PathBuf,
        #[arg(long, value_parser = parse_vec3)]
        point: Vec3,
        /// Excision radius as a fraction of the diameter.
        #[arg(long, default_value_t = moebius::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = moebius::DEFAULT_GUARD)]
        guard: f64,
        /// Write the inverted boundary mesh here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstructArgs {
    #[command(subcommand)]
    shape: Shape,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
enum Shape {
    Sphere {
        #[arg(long, default_value_t = 4)]
        subdivisions: u32,
    },
    Disk {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    Annulus {
        #[arg(long, default_value_t = 0.5)]
        inner: f64,
        #[arg(long, default_value_t = 1.0)]
        outer: f64,
        #[arg(long, default_value_t = 128)]
        n_angular: usize,
        #[arg(long, default_value_t = 16)]
        n_rings: usize,
    },
    Hemisphere {
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    HalfDisk {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    BumpyDisk {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
    },
    Clifford {
        #[arg(long, default_value_t = 128)]
        res: usize,
    },
    InvertedTorus {
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long, default_value_t = 1.5)]
        graph_radius: f64,
        /// Lateral radius where the mesh stops.
        #[arg(long, default_value_t = 12.0)]
        outer: f64,
    },
    Truncated {
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 6.0)]
        collar: f64,
        #[arg(long, default_value_t = 24.0)]
        cut: f64,
    },
    /// Scaled inverted torus glued into a flat disk bounded by a circle.
    Glued {
        #[arg(long, default_value_t = 0.05)]
        scale: f64,
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long, default_value_t = 1.5)]
        gamma_radius: f64,
        /// Glue a flat disk instead of the handle.
        #[arg(long)]
        flat: bool,
    },
}

#[derive(Args)]
struct MinimizeArgs {
    mesh: PathBuf,
    /// Keep boundary vertices fixed (the default).
    #[arg(long, conflicts_with = "sliding")]
    pinned: bool,
    /// Let boundary vertices slide along the circle.
    #[arg(long)]
    sliding: bool,
    /// Constraint circle centre.
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    circle_center: Vec3,
    /// Constraint circle radius; the circle lies in a plane normal to z.
    #[arg(long, default_value_t = 1.0)]
    circle_radius: f64,
    /// Skip the check that the boundary lies on the circle.
    #[arg(long)]
    no_curve: bool,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Central-difference gradient instead of the analytic one.
    #[arg(long)]
    central_difference: bool,
    /// Tangential smoothing every k iterations.
    #[arg(long, default_value_t = 0)]
    smoothing: usize,
    /// Trajectory CSV; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Final mesh.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn format_of(path: &Path) -> anyhow::Result<MeshFormat> {
    MeshFormat::from_path(path).with_context(|| format!("{}: unknown mesh extension (use .obj or .off)", path.display()))
}

fn read_mesh(path: &Path) -> anyhow::Result<TriMesh> {
    let fmt = format_of(path)?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_mesh(&bytes, fmt)?)
}

fn write_mesh(path: &Path, mesh: &TriMesh) -> anyhow::Result<()> {
    let fmt = format_of(path)?;
    fs::write(path, save_mesh(mesh, fmt)).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn construct(args: &ConstructArgs) -> anyhow::Result<()> {
    let Some(out) = &args.output else {
        bail!("construct needs --output");
    };
    format_of(out)?;
    let mut extra = serde_json::Map::new();
    let mesh = match &args.shape {
        Shape::Sphere { subdivisions } => constructors::make_sphere(*subdivisions)?,
        Shape::Disk { n, radius } => constructors::make_flat_disk(&Circle::new(Vec3::zeros(), *radius), *n)?,
        Shape::Annulus { inner, outer, n_angular, n_rings } => {
            constructors::make_annulus(*inner, *outer, *n_angular, *n_rings)?
        }
        Shape::Hemisphere { n } => constructors::make_hemisphere(*n)?,
        Shape::HalfDisk { radius, n } => constructors::make_half_disk(*radius, *n)?,
        Shape::BumpyDisk { n, seed, count, amplitude } => {
            let bumps = constructors::random_bumps(*seed, *count, *amplitude);
            extra.insert("bumps".into(), serde_json::to_value(&bumps)?);
            constructors::make_bumpy_disk(*n, &bumps)?
        }
        Shape::Clifford { res } => make_clifford_torus(&CliffordParams::standard(*res, *res))?,
        Shape::InvertedTorus { m, graph_radius, outer } => {
            make_inverted_torus(InvertedTorusParams { m: *m, graph_radius: *graph_radius }, *outer)?
        }
        Shape::Truncated { m, collar, cut } => {
            let t = make_truncated_inverted_torus(&TruncationParams {
                handle: InvertedTorusParams { m: *m, ..Default::default() },
                collar_radius: *collar,
                cut_radius: *cut,
            })?;
            extra.insert("boundary_height".into(), t.boundary_height.into());
            extra.insert("turning_angles".into(), serde_json::to_value(&t.turning_angles)?);
            t.mesh
        }
        Shape::Glued { scale, m, gamma_radius, flat } => {
            let handle = if *flat {
                GlueHandle::Flat
            } else {
                GlueHandle::InvertedTorus(InvertedTorusParams { m: *m, ..Default::default() })
            };
            let r = glue_handle_into_disk(&GlueParams {
                handle,
                scale: *scale,
                gamma: StarCurve::Circle { radius: *gamma_radius },
                flat_resolution: *m,
            })?;
            for (k, v) in [("eps_annulus", r.eps_annulus), ("w_inner", r.w_inner), ("w_outer", r.w_outer), ("w", r.w)] {
                extra.insert(k.into(), v.into());
            }
            r.mesh
        }
    };
    write_mesh(out, &mesh)?;
    let mut record = serde_json::to_value(&args.shape)?;
    let obj = record.as_object_mut().expect("shape serializes to an object");
    obj.insert("vertices".into(), mesh.num_vertices().into());
    obj.insert("faces".into(), mesh.num_faces().into());
    obj.extend(extra);
    fs::write(out.with_extension("json"), json(&record)?)?;
    info!("wrote {} ({} faces)", out.display(), mesh.num_faces());
    Ok(())
}

fn minimize(args: &MinimizeArgs) -> anyhow::Result<()> {
    let mesh = read_mesh(&args.mesh)?;
    let opts = MinimizeOptions {
        max_iters: args.max_iters,
        step: args.step,
        tolerance: args.tol,
        gradient: if args.central_difference {
            GradientMode::CentralDifference
        } else {
            GradientMode::Analytic
        },
        boundary: if args.sliding { BoundaryMode::Sliding } else { BoundaryMode::Pinned },
        curve: (!args.no_curve).then(|| ConstraintCurve::Circle(Circle::new(args.circle_center, args.circle_radius))),
        smoothing_interval: args.smoothing,
        ..Default::default()
    };
    let t = minimizer::minimize(&mesh, &opts)?;
    info!("{} iterations, stopped on {:?}", t.iterations(), t.termination);
    emit(args.csv.as_deref(), &t.to_csv())?;
    if let Some(out) = &args.output {
        write_mesh(out, &t.final_mesh)?;
    }
    if let Some(report) = &t.bad_points {
        eprintln!("mesh degenerated; bad-point report:\n{}", json(report)?);
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Energy { mesh } => emit(None, &json(&energies(&read_mesh(&mesh)?)?)?),
        Command::Construct(args) => construct(&args),
        Command::Transform { map, mesh, output, guard } => {
            let map = MoebiusMap::from_json(&fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?)?;
            let mesh = read_mesh(&mesh)?;
            format_of(&output)?;
            write_mesh(&output, &moebius::apply(&map, &mesh, guard)?)
        }
        Command::Minimize(args) => minimize(&args),
        Command::Monotonicity { mesh, center, radii, output } => {
            let p = monotonicity::profile(&read_mesh(&mesh)?, &center, &radii)?;
            emit(output.as_deref(), &p.to_csv())
        }
        Command::Biharmonic { bvp, output, cap, n_angular, n_rings } => {
            let bvp: AnnulusBVP = serde_json::from_str(&fs::read_to_string(&bvp).with_context(|| format!("reading {}", bvp.display()))?)?;
            let sol = biharmonic::solve_annulus(&bvp)?;
            if let Some(cap) = &cap {
                format_of(cap)?;
                write_mesh(cap, &biharmonic::cap_mesh(&sol, n_angular, n_rings)?)?;
            }
            emit(output.as_deref(), &json(&sol)?)
        }
        Command::Badpoints { mesh, radii, eps } => {
            let report = minimizer::detect_bad_points(&read_mesh(&mesh)?, &radii, eps)?;
            emit(None, &json(&report)?)
        }
        Command::InvertCheck { mesh, point, delta, guard, output } => {
            let mesh = read_mesh(&mesh)?;
            let delta = delta * mesh.diameter();
            if mesh.is_closed() {
                let r = moebius::inversion_energy_check(&mesh, &point, delta, guard)?;
                emit(None, &json(&r)?)
            } else {
                let r = moebius::line_boundary_inversion(&mesh, &point, delta)?;
                if let Some(out) = &output {
                    write_mesh(out, &r.mesh_out)?;
                }
                emit(None, &json(&serde_json::json!({ "lhs": r.lhs, "rhs": r.rhs }))?)
            }
        }
    }
}

fn configure_threads(serial: bool) -> anyhow::Result<()> {
    let threads = match std::env::var("WILLMORE_THREADS") {
        Ok(s) => Some(s.parse::<usize>().with_context(|| format!("WILLMORE_THREADS={s:?}"))?),
        Err(_) => None,
    };
    willmore::par::set_serial(serial);
    let n = if serial { Some(1) } else { threads };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads(cli.serial).and_then(|_| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .downcast_ref::<willmore::Error>()
                .is_some_and(|w| !w.is_validation());
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
