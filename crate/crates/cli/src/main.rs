use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlo_core::eval::{self, NoiseDirection, NoiseSpec, QualityReport};
use hlo_core::hlo::{self, EnergyMode, HloConfig, TieBreak};
use hlo_core::io::{self, FieldTarget, MeshFormat, ScalarField};
use hlo_core::laplacian::{self, FlowConfig, IterationStats, LaplacianKind, SmoothingResult};
use hlo_core::{fixtures, Error, Parallelism, TriMesh};

#[derive(Parser)]
#[command(
    name = "hlo",
    version,
    about = "Feature-preserving mesh denoising with half-kernel Laplacians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add Gaussian noise scaled by the mean edge length.
    AddNoise(AddNoiseArgs),
    /// Smooth a mesh with HLO or a full-window Laplacian baseline.
    Denoise(DenoiseArgs),
    /// Compare a denoised mesh against its ground truth.
    Metrics(MetricsArgs),
    /// Write one of the built-in test meshes.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct AddNoiseArgs {
    input: PathBuf,
    /// Noise standard deviation as a multiple of the mean edge length.
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Direction::Isotropic)]
    direction: Direction,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Isotropic,
    AlongNormal,
}

#[derive(Args)]
struct DenoiseArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Hlo)]
    method: Method,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    iterations: u32,
    /// Diffusion step λ·dt.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, value_enum, default_value_t = Energy::Literal)]
    energy_mode: Energy,
    /// Let boundary vertices move.
    #[arg(long)]
    free_boundaries: bool,
    #[arg(long, value_enum, default_value_t = Ties::LowestIndex)]
    tie_break: Ties,
    /// Seed for random tie-breaking.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-iteration diagnostics as CSV.
    #[arg(long, value_name = "CSV")]
    emit_trace: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Hlo,
    Uniform,
    Cotangent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Energy {
    Literal,
    CandidatePosition,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    LowestIndex,
    Random,
}

#[derive(Args)]
struct MetricsArgs {
    denoised: PathBuf,
    ground_truth: PathBuf,
    /// Write the report as a CSV header and row.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the signed per-vertex error as CSV.
    #[arg(long, value_name = "CSV")]
    signed_field: Option<PathBuf>,
    /// Runtime in seconds to record in the report.
    #[arg(long, default_value_t = 0.0)]
    runtime: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    shape: Shape,
    /// Subdivision level for spheres, segments per side for cubes and grids.
    #[arg(long, default_value_t = 4)]
    resolution: u32,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Icosphere,
    Cube,
    Grid,
    Octahedron,
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl Failure {
    fn usage(error: Error) -> Self {
        Failure { code: 2, error }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::InvalidConfig(_) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult = Result<(), Failure>;

fn load(path: &Path) -> Result<TriMesh, Failure> {
    io::read_mesh(path, MeshFormat::Auto).map_err(Failure::usage)
}

fn save(mesh: &TriMesh, path: &Path) -> CliResult {
    io::write_mesh(mesh, path, MeshFormat::Auto).map_err(|e| match e {
        Error::UnsupportedFormat(_) => Failure::usage(e),
        e => e.into(),
    })
}

fn add_noise(args: &AddNoiseArgs) -> CliResult {
    let mesh = load(&args.input)?;
    let spec = NoiseSpec {
        sigma_factor: args.sigma,
        seed: args.seed,
        direction: match args.direction {
            Direction::Isotropic => NoiseDirection::Isotropic,
            Direction::AlongNormal => NoiseDirection::AlongNormal,
        },
    };
    let noisy = eval::add_noise(&mesh, &spec)?;
    save(&noisy, &args.output)?;
    let le = mesh.mean_edge_length();
    println!("sigma_n {} ({} x l_e)", args.sigma * le, args.sigma);
    println!("l_e {le}");
    println!("seed {}", args.seed);
    Ok(())
}

struct TraceRow {
    stats: IterationStats,
    curvature_energy: f64,
}

fn denoise(args: &DenoiseArgs) -> CliResult {
    let mesh = load(&args.input)?;
    let parallelism = match args.threads {
        Some(1) => Parallelism::Sequential,
        _ => Parallelism::default(),
    };
    let iterations = args.iterations as usize;
    let want_trace = args.emit_trace.is_some();
    let mut trace = Vec::new();
    let mut observe = |stats: &IterationStats, m: &TriMesh| {
        if want_trace {
            trace.push((*stats, eval::mean_curvature_energy(m)));
        }
    };

    let start = Instant::now();
    let result: SmoothingResult = with_threads(args.threads, || match args.method {
        Method::Hlo => {
            let cfg = HloConfig {
                iterations,
                step: args.step,
                fix_boundaries: !args.free_boundaries,
                energy_mode: match args.energy_mode {
                    Energy::Literal => EnergyMode::Literal,
                    Energy::CandidatePosition => EnergyMode::CandidatePosition,
                },
                tie_break: match args.tie_break {
                    Ties::LowestIndex => TieBreak::LowestIndex,
                    Ties::Random => TieBreak::Random,
                },
                rng_seed: args.seed,
                parallelism,
            };
            hlo::denoise_observed(&mesh, &cfg, &mut observe)
        }
        Method::Uniform | Method::Cotangent => {
            let kind = if args.method == Method::Uniform {
                LaplacianKind::Uniform
            } else {
                LaplacianKind::Cotangent
            };
            let cfg = FlowConfig {
                step: args.step,
                iterations,
                fix_boundaries: !args.free_boundaries,
                parallelism,
            };
            laplacian::smooth_observed(&mesh, kind, &cfg, &mut observe)
        }
    })??;
    let runtime = start.elapsed().as_secs_f64();

    save(&result.mesh, &args.output)?;
    if let Some(path) = &args.emit_trace {
        let rows = trace
            .into_iter()
            .map(|(stats, e)| {
                e.map(|curvature_energy| TraceRow {
                    stats,
                    curvature_energy,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        write_trace(path, &rows)?;
    }
    println!("runtime {runtime:.6} s");
    if result.mesh.boundary_vertex_count() == 0 {
        if let Ok(v) = eval::enclosed_volume(&result.mesh) {
            println!("volume {v:.9}");
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<u32>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    _threads: Option<u32>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    Ok(f())
}

fn write_trace(path: &Path, rows: &[TraceRow]) -> CliResult {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "iteration,mean_displacement,total_laplacian_norm,mean_curvature_energy"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.stats.iteration,
            r.stats.mean_displacement,
            r.stats.total_laplacian_norm,
            r.curvature_energy
        )?;
    }
    w.flush()?;
    Ok(())
}

fn metrics(args: &MetricsArgs) -> CliResult {
    let denoised = load(&args.denoised)?;
    let truth = load(&args.ground_truth)?;
    let report = QualityReport::evaluate(&denoised, &truth, args.runtime)?;
    println!("{report}");
    if let Some(path) = &args.output {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", QualityReport::CSV_HEADER)?;
        writeln!(w, "{}", report.csv_row())?;
        w.flush()?;
    }
    if let Some(path) = &args.signed_field {
        let field = ScalarField {
            target: FieldTarget::Vertex,
            values: eval::avg_vertex_error(&denoised, &truth)?.signed,
            label: "signed vertex error".into(),
        };
        io::write_scalar_field(&field, &denoised, path)?;
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> CliResult {
    let r = args.resolution;
    let mesh = match args.shape {
        Shape::Icosphere if r > 8 => {
            return Err(Failure::usage(Error::InvalidConfig(format!(
                "icosphere level {r} is too large (max 8)"
            ))))
        }
        Shape::Icosphere => fixtures::icosphere(r),
        Shape::Cube => fixtures::unit_cube(r.max(1) as usize),
        Shape::Grid => fixtures::plane_grid(r.max(1) as usize),
        Shape::Octahedron => fixtures::octahedron(),
    };
    save(&mesh, &args.output)?;
    println!(
        "{} vertices, {} faces",
        mesh.vertex_count(),
        mesh.face_count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::AddNoise(a) => add_noise(a),
        Command::Denoise(a) => denoise(a),
        Command::Metrics(a) => metrics(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {}: {error}", error.kind());
            ExitCode::from(code)
        }
    }
}
