//! Half-kernel Laplacian operator (HLO).
//!
//! For every vertex the one-ring is split into two half windows once per
//! neighbor, giving `2 |NV|` candidate subsets. Each subset yields a uniform
//! Laplacian `d` that is projected onto the full-window local normal `n`
//! (`δ = (d·n) n`); the candidate with the lowest regularization energy drives
//! the diffusion update. At a sharp edge, one subset holds only neighbors that
//! lie on the same smooth side, so the selected δ stays small and the feature
//! survives, while ordinary vertices still get a full-size smoothing step.
//!
//! Half-window construction for a center `v`, centroid `c` and start neighbor
//! `k`:
//!
//! 1. The pairing plane passes through `v`, `c` and `k`. The other neighbor
//!    closest to it is `paired`. When `v`, `c`, `k` are collinear the plane
//!    collapses to the line `v k` and distance to that line is used instead.
//! 2. The splitting plane passes through `v`, `k` and `paired`. Neighbors on
//!    its positive side (or on it) go left, the rest go right. If the three
//!    points are collinear the splitting plane is taken to contain the line
//!    and the tangent direction orthogonal to it, so the line endpoints form
//!    one side of a straight crease.
//! 3. `k` and `paired` belong to both halves.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::laplacian::{
    advance, FlowConfig, IterationStats, LaplacianField, LaplacianKind, SmoothingResult,
};
use crate::par::try_map_range;
use crate::{Error, Parallelism, Point, Result, TriMesh, Vector, VertexNeighborhood};

/// Initial "best energy" of the candidate search; candidates must beat it.
pub const ENERGY_SENTINEL: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// One partition of a one-ring into two half windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfWindowPair {
    pub start: usize,
    pub paired: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl HalfWindowPair {
    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Identifies a half window: the pair index in the output of
/// [`generate_half_windows`] and which side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowRef {
    pub pair: usize,
    pub side: Side,
}

/// A projected half-kernel Laplacian and its energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HloCandidate {
    /// `None` when no subset search happened (null local normal or fewer than
    /// three neighbors).
    pub window: Option<WindowRef>,
    /// Unprojected half-window Laplacian `d`.
    pub raw: Vector,
    /// `δ = (d·n) n`.
    pub projected: Vector,
    pub energy: f64,
}

/// How the data term of the regularization energy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyMode {
    /// `‖δ‖ + ‖v^t - v^0‖`. The data term is the same for every candidate,
    /// so selection reduces to the smallest `‖δ‖`.
    #[default]
    Literal,
    /// `‖δ‖ + ‖(v^t - step·δ) - v^0‖`: distance of the updated position to
    /// the original one.
    CandidatePosition,
}

/// Choice among neighbors equally close to the pairing plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lowest vertex index.
    #[default]
    LowestIndex,
    /// Uniformly random, seeded by [`HloConfig::rng_seed`], the vertex and the
    /// iteration.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HloConfig {
    /// The method's only tuning parameter.
    pub iterations: usize,
    /// λ·dt.
    pub step: f64,
    pub fix_boundaries: bool,
    pub energy_mode: EnergyMode,
    pub tie_break: TieBreak,
    /// Used only with [`TieBreak::Random`].
    pub rng_seed: u64,
    pub parallelism: Parallelism,
}

impl Default for HloConfig {
    fn default() -> Self {
        HloConfig {
            iterations: 1,
            step: 1.0,
            fix_boundaries: true,
            energy_mode: EnergyMode::Literal,
            tie_break: TieBreak::LowestIndex,
            rng_seed: 0,
            parallelism: Parallelism::default(),
        }
    }
}

impl HloConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        HloConfig {
            iterations,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flow().validate()
    }

    fn flow(&self) -> FlowConfig {
        FlowConfig {
            step: self.step,
            iterations: self.iterations,
            fix_boundaries: self.fix_boundaries,
            parallelism: self.parallelism,
        }
    }
}

/// Enumerates the `|NV|` half-window pairs of a neighborhood, breaking
/// pairing ties by lowest vertex index.
pub fn generate_half_windows(
    mesh: &TriMesh,
    nbh: &VertexNeighborhood,
) -> Result<Vec<HalfWindowPair>> {
    generate_half_windows_with(mesh, nbh, None)
}

/// Like [`generate_half_windows`]; ties are broken uniformly at random when an
/// RNG is given.
pub fn generate_half_windows_with(
    mesh: &TriMesh,
    nbh: &VertexNeighborhood,
    mut rng: Option<&mut dyn RngCore>,
) -> Result<Vec<HalfWindowPair>> {
    let ring = &nbh.neighbors;
    if ring.len() < 3 {
        return Err(Error::TooFewNeighbors {
            vertex: nbh.center,
            count: ring.len(),
        });
    }
    let pos = mesh.positions();
    let eps = mesh.eps();
    let p = pos[nbh.center];
    let to_centroid = nbh.centroid - p;

    let mut dist = Vec::with_capacity(ring.len());
    let mut ties = Vec::with_capacity(ring.len());
    let mut out = Vec::with_capacity(ring.len());
    for &k in ring {
        let axis = pos[k] - p;
        let axis_len = axis.norm();

        // Pairing: distance to the plane (v, c, k), or to the line (v, k).
        let plane_n = to_centroid.cross(&axis);
        let metric = if axis_len <= eps {
            Pairing::Point
        } else if plane_n.norm() <= eps * axis_len {
            Pairing::Line(axis / axis_len)
        } else {
            Pairing::Plane(plane_n.normalize())
        };
        dist.clear();
        dist.extend(
            ring.iter()
                .filter(|&&m| m != k)
                .map(|&m| (m, metric.distance(pos[m] - p))),
        );
        let best = dist.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
        ties.clear();
        ties.extend(
            dist.iter()
                .filter(|&&(_, d)| d <= best + eps)
                .map(|&(m, _)| m),
        );
        let paired = match rng.as_deref_mut() {
            Some(r) if ties.len() > 1 => ties[r.random_range(0..ties.len())],
            _ => ties[0],
        };

        let split_n = split_normal(mesh, nbh, axis, pos[paired] - p);
        let mut left = vec![k, paired];
        let mut right = vec![k, paired];
        for &m in ring {
            if m == k || m == paired {
                continue;
            }
            if (pos[m] - p).dot(&split_n) >= -eps {
                left.push(m);
            } else {
                right.push(m);
            }
        }
        out.push(HalfWindowPair {
            start: k,
            paired,
            left,
            right,
        });
    }
    Ok(out)
}

enum Pairing {
    Plane(Vector),
    /// Degenerate pairing plane: distance to the line through the center.
    Line(Vector),
    /// Coincident start neighbor.
    Point,
}

impl Pairing {
    fn distance(&self, offset: Vector) -> f64 {
        match self {
            Pairing::Plane(n) => offset.dot(n).abs(),
            Pairing::Line(dir) => offset.cross(dir).norm(),
            Pairing::Point => offset.norm(),
        }
    }
}

/// Unit normal of the splitting plane through `v`, `v + axis`, `v + other`.
fn split_normal(mesh: &TriMesh, nbh: &VertexNeighborhood, axis: Vector, other: Vector) -> Vector {
    let eps = mesh.eps();
    let axis_len = axis.norm();
    let n = axis.cross(&other);
    if axis_len > eps && n.norm() > eps * axis_len {
        return n.normalize();
    }
    // Collinear: the plane containing the line and the in-surface direction
    // orthogonal to it, i.e. the one whose normal is the surface normal with
    // its component along the line removed.
    let dir = if axis_len > eps {
        axis / axis_len
    } else {
        Vector::zeros()
    };
    let reject = |u: Vector| u - dir * dir.dot(&u);
    let surface_normal = nbh
        .local_normal
        .or_else(|| area_weighted_normal(mesh, nbh.center));
    if let Some(s) = surface_normal {
        let r = reject(s);
        if r.norm() > 1e-9 {
            return r.normalize();
        }
    }
    // Nothing better: any direction orthogonal to the line.
    let pick = if dir.x.abs() < 0.5 {
        Vector::x()
    } else {
        Vector::y()
    };
    let r = reject(pick);
    if r.norm() > 0.0 {
        r.normalize()
    } else {
        Vector::z()
    }
}

fn area_weighted_normal(mesh: &TriMesh, v: usize) -> Option<Vector> {
    let n = mesh
        .vertex_faces(v)
        .iter()
        .fold(Vector::zeros(), |acc, &f| acc + mesh.face_cross(f));
    (n.norm() > 0.0).then(|| n.normalize())
}

fn energy(mode: EnergyMode, step: f64, p: Point, p0: Point, delta: Vector) -> f64 {
    match mode {
        EnergyMode::Literal => delta.norm() + (p - p0).norm(),
        EnergyMode::CandidatePosition => delta.norm() + ((p - step * delta) - p0).norm(),
    }
}

/// Evaluates the half-kernel Laplacian of vertex `v` and returns the
/// candidate of minimal energy. `v0` is the vertex position before the first
/// iteration.
pub fn half_kernel_laplacian(
    mesh: &TriMesh,
    v: usize,
    v0: Point,
    cfg: &HloConfig,
) -> Result<HloCandidate> {
    select(mesh, v, v0, cfg, 0)
}

/// All `2 |NV|` candidates of a vertex in evaluation order (pair by pair, left
/// before right). Empty when the vertex takes a fallback path.
pub fn half_kernel_candidates(
    mesh: &TriMesh,
    v: usize,
    v0: Point,
    cfg: &HloConfig,
) -> Result<Vec<HloCandidate>> {
    let nbh = mesh.neighborhood(v)?;
    let (Some(n), true) = (nbh.local_normal, nbh.neighbors.len() >= 3) else {
        return Ok(Vec::new());
    };
    let windows = windows_for(mesh, &nbh, cfg, 0)?;
    let p = mesh.position(v);
    let mut out = Vec::with_capacity(2 * windows.len());
    for (i, w) in windows.iter().enumerate() {
        for side in [Side::Left, Side::Right] {
            let raw = subset_laplacian(mesh.positions(), p, w.side(side));
            let projected = raw.dot(&n) * n;
            out.push(HloCandidate {
                window: Some(WindowRef { pair: i, side }),
                raw,
                projected,
                energy: energy(cfg.energy_mode, cfg.step, p, v0, projected),
            });
        }
    }
    Ok(out)
}

fn subset_laplacian(pos: &[Point], p: Point, subset: &[usize]) -> Vector {
    let sum = subset
        .iter()
        .fold(Vector::zeros(), |acc, &m| acc + (p - pos[m]));
    sum / subset.len() as f64
}

fn windows_for(
    mesh: &TriMesh,
    nbh: &VertexNeighborhood,
    cfg: &HloConfig,
    iteration: usize,
) -> Result<Vec<HalfWindowPair>> {
    match cfg.tie_break {
        TieBreak::LowestIndex => generate_half_windows(mesh, nbh),
        TieBreak::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.rng_seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            rng.set_stream(nbh.center as u64);
            generate_half_windows_with(mesh, nbh, Some(&mut rng))
        }
    }
}

fn select(
    mesh: &TriMesh,
    v: usize,
    v0: Point,
    cfg: &HloConfig,
    iteration: usize,
) -> Result<HloCandidate> {
    let nbh = mesh.neighborhood(v)?;
    let p = mesh.position(v);
    let Some(n) = nbh.local_normal else {
        // Already at its centroid: nothing to smooth.
        return Ok(HloCandidate {
            window: None,
            raw: Vector::zeros(),
            projected: Vector::zeros(),
            energy: (p - v0).norm(),
        });
    };
    if nbh.neighbors.len() < 3 {
        // Full-window uniform Laplacian, which is already parallel to n.
        let raw = p - nbh.centroid;
        let projected = raw.dot(&n) * n;
        return Ok(HloCandidate {
            window: None,
            raw,
            projected,
            energy: energy(cfg.energy_mode, cfg.step, p, v0, projected),
        });
    }

    let windows = windows_for(mesh, &nbh, cfg, iteration)?;
    let pos = mesh.positions();
    let mut best: Option<HloCandidate> = None;
    let mut best_energy = ENERGY_SENTINEL;
    for (i, w) in windows.iter().enumerate() {
        for side in [Side::Left, Side::Right] {
            let raw = subset_laplacian(pos, p, w.side(side));
            let projected = raw.dot(&n) * n;
            let e = energy(cfg.energy_mode, cfg.step, p, v0, projected);
            if e < best_energy {
                best_energy = e;
                best = Some(HloCandidate {
                    window: Some(WindowRef { pair: i, side }),
                    raw,
                    projected,
                    energy: e,
                });
            }
        }
    }
    best.ok_or(Error::NoCandidate { vertex: v })
}

/// Selected half-kernel Laplacians for every vertex of `mesh`, with zero
/// vectors for fixed boundary vertices.
pub fn half_kernel_field(
    mesh: &TriMesh,
    original: &[Point],
    cfg: &HloConfig,
    iteration: usize,
) -> Result<LaplacianField> {
    if original.len() != mesh.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: mesh.vertex_count(),
            found: original.len(),
        });
    }
    let vectors = try_map_range(mesh.vertex_count(), cfg.parallelism, |v| {
        if cfg.fix_boundaries && mesh.is_boundary(v) {
            Ok(Vector::zeros())
        } else {
            select(mesh, v, original[v], cfg, iteration).map(|c| c.projected)
        }
    })?;
    Ok(LaplacianField {
        vectors,
        kind: LaplacianKind::HalfKernel,
    })
}

/// Runs `cfg.iterations` Jacobi sweeps of half-kernel diffusion.
pub fn denoise(mesh: &TriMesh, cfg: &HloConfig) -> Result<SmoothingResult> {
    denoise_observed(mesh, cfg, |_, _| {})
}

/// Like [`denoise`], calling `observer` with the stats and mesh after every
/// iteration.
pub fn denoise_observed(
    mesh: &TriMesh,
    cfg: &HloConfig,
    mut observer: impl FnMut(&IterationStats, &TriMesh),
) -> Result<SmoothingResult> {
    cfg.validate()?;
    let flow = cfg.flow();
    let original = mesh.positions().to_vec();
    let mut current = mesh.clone();
    let mut trace = Vec::with_capacity(cfg.iterations);
    for it in 1..=cfg.iterations {
        let field = half_kernel_field(&current, &original, cfg, it)?;
        let (next, stats) = advance(&current, field, &flow, it)?;
        observer(&stats, &next);
        trace.push(stats);
        current = next;
    }
    Ok(SmoothingResult {
        mesh: current,
        trace,
    })
}
