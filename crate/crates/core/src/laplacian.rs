//! Full-window Laplacians and the explicit diffusion-flow stepper.
//!
//! Laplacians follow the δ-coordinate convention `δ_i = v_i - centroid`, which
//! points away from the neighborhood. The stepper therefore subtracts:
//! `v_i ← v_i - step · δ_i` moves a vertex toward its (weighted) centroid.

use crate::par::{map_range, try_map_range};
use crate::{Error, Parallelism, Point, Result, TriMesh, Vector};

/// Upper clamp for cotangent edge weights.
pub const COTANGENT_WEIGHT_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    Uniform,
    Cotangent,
    HalfKernel,
}

/// One Laplacian vector per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianField {
    pub vectors: Vec<Vector>,
    pub kind: LaplacianKind,
}

impl LaplacianField {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Sets boundary entries to zero.
    pub fn zero_boundary(&mut self, mesh: &TriMesh) {
        for (d, &b) in self.vectors.iter_mut().zip(mesh.boundary_flags()) {
            if b {
                *d = Vector::zeros();
            }
        }
    }

    pub fn total_norm(&self) -> f64 {
        self.vectors.iter().map(|d| d.norm()).sum()
    }
}

/// Explicit-Euler diffusion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// λ·dt.
    pub step: f64,
    pub iterations: usize,
    pub fix_boundaries: bool,
    pub parallelism: Parallelism,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step: 1.0,
            iterations: 1,
            fix_boundaries: true,
            parallelism: Parallelism::default(),
        }
    }
}

impl FlowConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        FlowConfig {
            iterations,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn uniform_laplacian(mesh: &TriMesh) -> Result<LaplacianField> {
    uniform_laplacian_with(mesh, Parallelism::default())
}

pub fn uniform_laplacian_with(mesh: &TriMesh, par: Parallelism) -> Result<LaplacianField> {
    let vectors = try_map_range(mesh.vertex_count(), par, |v| uniform_at(mesh, v))?;
    Ok(LaplacianField {
        vectors,
        kind: LaplacianKind::Uniform,
    })
}

pub(crate) fn uniform_at(mesh: &TriMesh, v: usize) -> Result<Vector> {
    let nb = mesh.neighbors(v);
    if nb.is_empty() {
        return Err(Error::IsolatedVertex(v));
    }
    let c = crate::mesh::centroid_of(mesh.positions(), nb);
    Ok(mesh.position(v) - c)
}

/// Normalized cotangent Laplacian `Σ w_ik (v_i - v_k) / Σ w_ik` with
/// `w_ik = ½(cot α_ik + cot β_ik)` clamped to `[0, COTANGENT_WEIGHT_MAX]`.
pub fn cotangent_laplacian(mesh: &TriMesh) -> Result<LaplacianField> {
    cotangent_laplacian_with(mesh, Parallelism::default(), true)
}

pub fn cotangent_laplacian_with(
    mesh: &TriMesh,
    par: Parallelism,
    clamp: bool,
) -> Result<LaplacianField> {
    let vectors = try_map_range(mesh.vertex_count(), par, |v| cotangent_at(mesh, v, clamp))?;
    Ok(LaplacianField {
        vectors,
        kind: LaplacianKind::Cotangent,
    })
}

fn cot(apex: Point, a: Point, b: Point) -> f64 {
    let (u, w) = (a - apex, b - apex);
    let cross = u.cross(&w).norm();
    let dot = u.dot(&w);
    if cross > 0.0 {
        dot / cross
    } else if dot > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

fn cotangent_at(mesh: &TriMesh, v: usize, clamp: bool) -> Result<Vector> {
    let nb = mesh.neighbors(v);
    if nb.is_empty() {
        return Err(Error::IsolatedVertex(v));
    }
    let pos = mesh.positions();
    let pv = pos[v];
    let mut weights = vec![0.0; nb.len()];
    for &f in mesh.vertex_faces(v) {
        let face = mesh.faces()[f];
        let c = face.iter().position(|&x| x == v).expect("incident face");
        let (a, b) = (face[(c + 1) % 3], face[(c + 2) % 3]);
        // The angle at `a` is opposite edge (v, b) and vice versa.
        let cot_a = cot(pos[a], pv, pos[b]);
        let cot_b = cot(pos[b], pv, pos[a]);
        let ib = nb.binary_search(&b).expect("adjacent");
        let ia = nb.binary_search(&a).expect("adjacent");
        weights[ib] += 0.5 * cot_a;
        weights[ia] += 0.5 * cot_b;
    }
    let mut sum_w = 0.0;
    let mut acc = Vector::zeros();
    for (&k, &w) in nb.iter().zip(&weights) {
        let w = if clamp {
            if w.is_nan() {
                0.0
            } else {
                w.clamp(0.0, COTANGENT_WEIGHT_MAX)
            }
        } else if w.is_finite() {
            w
        } else {
            0.0
        };
        sum_w += w;
        acc += w * (pv - pos[k]);
    }
    if sum_w == 0.0 {
        return Ok(Vector::zeros());
    }
    Ok(acc / sum_w)
}

/// One Jacobi update `v ← v - step · δ`. Boundary vertices stay bit-identical
/// when `cfg.fix_boundaries` is set.
pub fn flow_step(mesh: &TriMesh, field: &LaplacianField, cfg: &FlowConfig) -> Result<Vec<Point>> {
    if field.len() != mesh.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: mesh.vertex_count(),
            found: field.len(),
        });
    }
    let pos = mesh.positions();
    Ok(map_range(pos.len(), cfg.parallelism, |v| {
        if cfg.fix_boundaries && mesh.is_boundary(v) {
            pos[v]
        } else {
            pos[v] - cfg.step * field.vectors[v]
        }
    }))
}

/// Diagnostics recorded after each smoothing iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Mean over all vertices of the distance moved in this iteration.
    pub mean_displacement: f64,
    /// Sum of the norms of the applied Laplacian vectors.
    pub total_laplacian_norm: f64,
}

/// Final mesh plus per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct SmoothingResult {
    pub mesh: TriMesh,
    pub trace: Vec<IterationStats>,
}

/// Applies a computed field, returning the next mesh and its diagnostics.
pub(crate) fn advance(
    mesh: &TriMesh,
    mut field: LaplacianField,
    cfg: &FlowConfig,
    iteration: usize,
) -> Result<(TriMesh, IterationStats)> {
    if cfg.fix_boundaries {
        field.zero_boundary(mesh);
    }
    let next = flow_step(mesh, &field, cfg)?;
    let moved: f64 = mesh
        .positions()
        .iter()
        .zip(&next)
        .map(|(a, b)| (a - b).norm())
        .sum();
    let stats = IterationStats {
        iteration,
        mean_displacement: moved / next.len() as f64,
        total_laplacian_norm: field.total_norm(),
    };
    Ok((mesh.with_positions(next)?, stats))
}

/// Iterated full-window smoothing (the uniform and cotangent baselines).
pub fn smooth(mesh: &TriMesh, kind: LaplacianKind, cfg: &FlowConfig) -> Result<SmoothingResult> {
    smooth_observed(mesh, kind, cfg, |_, _| {})
}

/// Like [`smooth`], calling `observer` with the stats and mesh after every
/// iteration.
pub fn smooth_observed(
    mesh: &TriMesh,
    kind: LaplacianKind,
    cfg: &FlowConfig,
    mut observer: impl FnMut(&IterationStats, &TriMesh),
) -> Result<SmoothingResult> {
    cfg.validate()?;
    let mut current = mesh.clone();
    let mut trace = Vec::with_capacity(cfg.iterations);
    for it in 1..=cfg.iterations {
        let field = match kind {
            LaplacianKind::Uniform => uniform_laplacian_with(&current, cfg.parallelism)?,
            LaplacianKind::Cotangent => cotangent_laplacian_with(&current, cfg.parallelism, true)?,
            LaplacianKind::HalfKernel => {
                return Err(Error::InvalidConfig(
                    "half-kernel smoothing is driven by hlo::denoise".into(),
                ))
            }
        };
        let (next, stats) = advance(&current, field, cfg, it)?;
        observer(&stats, &next);
        trace.push(stats);
        current = next;
    }
    Ok(SmoothingResult {
        mesh: current,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{eval, fixtures};
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn uniform_apex() {
        let m = fixtures::hexagon_fan(1.0);
        let f = uniform_laplacian(&m).unwrap();
        assert_relative_eq!(f.vectors[0], Vector::z(), epsilon = 1e-15);
    }

    #[test]
    fn uniform_hand_arithmetic() {
        // vertex (2,0,0) with neighbors (0,0,0), (2,2,0): centroid (1,1,0)
        let m = TriMesh::new(
            vec![p(2., 0., 0.), p(0., 0., 0.), p(2., 2., 0.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let f = uniform_laplacian(&m).unwrap();
        assert_eq!(f.vectors[0], Vector::new(1.0, -1.0, 0.0));
        assert_eq!(f.kind, LaplacianKind::Uniform);
    }

    #[test]
    fn uniform_zero_at_centroid_and_octahedron_sum() {
        let g = fixtures::plane_grid(4);
        let f = uniform_laplacian(&g).unwrap();
        for v in 0..g.vertex_count() {
            if !g.is_boundary(v) {
                assert!(f.vectors[v].norm() < 1e-15);
            }
        }
        let o = uniform_laplacian(&fixtures::octahedron()).unwrap();
        let sum = o.vectors.iter().fold(Vector::zeros(), |a, d| a + d);
        assert!(sum.norm() < 1e-15);
    }

    #[test]
    fn isolated_vertex_error() {
        let m = TriMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(3., 3., 3.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            uniform_laplacian(&m),
            Err(Error::IsolatedVertex(3))
        ));
        assert!(matches!(
            cotangent_laplacian(&m),
            Err(Error::IsolatedVertex(3))
        ));
    }

    #[test]
    fn cotangent_planar_grid_interior_is_zero() {
        let g = fixtures::plane_grid(6);
        let f = cotangent_laplacian(&g).unwrap();
        for v in 0..g.vertex_count() {
            if !g.is_boundary(v) {
                assert!(f.vectors[v].norm() < 1e-9, "{v}: {}", f.vectors[v]);
            }
        }
        // linear precision: an off-center interior vertex in a plane is still
        // zero with unclamped weights
        let mut pts = g.positions().to_vec();
        pts[24] += Vector::new(0.03, -0.02, 0.0);
        let f = cotangent_laplacian_with(
            &g.with_positions(pts).unwrap(),
            Parallelism::Sequential,
            false,
        )
        .unwrap();
        assert!(f.vectors[24].norm() < 1e-9);
    }

    #[test]
    fn cotangent_points_radially_on_sphere() {
        let s = fixtures::icosphere(3);
        let f = cotangent_laplacian(&s).unwrap();
        let max_deg = (0..s.vertex_count())
            .map(|v| {
                f.vectors[v]
                    .normalize()
                    .dot(&s.position(v).coords)
                    .clamp(-1.0, 1.0)
                    .acos()
                    .to_degrees()
            })
            .fold(0.0, f64::max);
        assert!(max_deg < 5.0, "max angle {max_deg}");
    }

    #[test]
    fn cotangent_scales_linearly() {
        let s = fixtures::icosphere(2);
        let big = s
            .with_positions(s.positions().iter().map(|q| q * 2.0).collect())
            .unwrap();
        let (a, b) = (
            cotangent_laplacian(&s).unwrap(),
            cotangent_laplacian(&big).unwrap(),
        );
        for (x, y) in a.vectors.iter().zip(&b.vectors) {
            assert_relative_eq!(*y, 2.0 * x, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn cotangent_clamps_degenerate_weights() {
        // A sliver with a near-180° angle gives a huge negative cotangent that
        // the clamp zeroes out.
        let m = TriMesh::new(
            vec![
                p(0., 0., 0.),
                p(1., 0., 0.),
                p(0.5, 1e-9, 0.),
                p(0.5, 1.0, 0.),
            ],
            vec![[0, 2, 1], [0, 1, 3]],
        )
        .unwrap();
        let clamped = cotangent_laplacian(&m).unwrap();
        assert!(clamped
            .vectors
            .iter()
            .all(|d| d.iter().all(|x| x.is_finite())));
        let raw = cotangent_laplacian_with(&m, Parallelism::Sequential, false).unwrap();
        assert_ne!(clamped, raw);
    }

    #[test]
    fn flow_step_zero_field_is_identity() {
        let m = fixtures::icosphere(1);
        let f = LaplacianField {
            vectors: vec![Vector::zeros(); m.vertex_count()],
            kind: LaplacianKind::Uniform,
        };
        assert_eq!(
            flow_step(&m, &f, &FlowConfig::default()).unwrap(),
            m.positions()
        );
    }

    #[test]
    fn flow_step_lands_on_centroid() {
        let m = fixtures::hexagon_fan(0.7);
        let f = uniform_laplacian(&m).unwrap();
        let next = flow_step(&m, &f, &FlowConfig::default()).unwrap();
        assert_relative_eq!(next[0], Point::origin(), epsilon = 1e-15);
        // boundary ring fixed by default
        assert_eq!(&next[1..], &m.positions()[1..]);

        let s = fixtures::icosphere(2);
        let f = uniform_laplacian(&s).unwrap();
        let next = flow_step(&s, &f, &FlowConfig::default()).unwrap();
        for (v, p) in next.iter().enumerate() {
            let c = crate::mesh::centroid_of(s.positions(), s.neighbors(v));
            assert_relative_eq!(*p, c, epsilon = 1e-15);
        }
    }

    #[test]
    fn flow_step_length_mismatch() {
        let m = fixtures::octahedron();
        let f = LaplacianField {
            vectors: vec![Vector::zeros(); 2],
            kind: LaplacianKind::Uniform,
        };
        assert!(matches!(
            flow_step(&m, &f, &FlowConfig::default()),
            Err(Error::LengthMismatch {
                expected: 6,
                found: 2
            })
        ));
    }

    #[test]
    fn uniform_flow_shrinks_noisy_sphere_monotonically() {
        let clean = fixtures::icosphere(3);
        let noisy = eval::add_noise(&clean, &eval::NoiseSpec::isotropic(0.3, 11)).unwrap();
        let mut volumes = vec![eval::enclosed_volume(&noisy).unwrap()];
        smooth_observed(
            &noisy,
            LaplacianKind::Uniform,
            &FlowConfig::with_iterations(10),
            |_, m| {
                volumes.push(eval::enclosed_volume(m).unwrap());
            },
        )
        .unwrap();
        assert_eq!(volumes.len(), 11);
        assert!(volumes.windows(2).all(|w| w[1] < w[0]), "{volumes:?}");
    }

    #[test]
    fn boundary_is_bit_identical() {
        let g = fixtures::plane_grid(6);
        let mut pts = g.positions().to_vec();
        for (i, q) in pts.iter_mut().enumerate() {
            q.z = ((i * 7919) % 13) as f64 * 0.01;
        }
        let g = g.with_positions(pts).unwrap();
        for kind in [LaplacianKind::Uniform, LaplacianKind::Cotangent] {
            let out = smooth(&g, kind, &FlowConfig::with_iterations(20)).unwrap();
            for v in 0..g.vertex_count() {
                if g.is_boundary(v) {
                    assert_eq!(out.mesh.position(v), g.position(v));
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::with_iterations(0).validate().is_err());
        let cfg = FlowConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(smooth(
            &fixtures::octahedron(),
            LaplacianKind::HalfKernel,
            &FlowConfig::default()
        )
        .is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let clean = fixtures::icosphere(3);
        let noisy = eval::add_noise(&clean, &eval::NoiseSpec::isotropic(0.3, 5)).unwrap();
        for kind in [LaplacianKind::Uniform, LaplacianKind::Cotangent] {
            let seq = FlowConfig {
                iterations: 3,
                parallelism: Parallelism::Sequential,
                ..Default::default()
            };
            let par = FlowConfig {
                parallelism: Parallelism::Parallel,
                ..seq
            };
            let a = smooth(&noisy, kind, &seq).unwrap();
            let b = smooth(&noisy, kind, &par).unwrap();
            assert_eq!(a.mesh.positions(), b.mesh.positions());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn uniform_translation_invariant_rotation_equivariant(
            t in proptest::collection::vec(-10.0f64..10.0, 3),
            axis in proptest::collection::vec(-1.0f64..1.0, 3),
            angle in -3.0f64..3.0,
        ) {
            let axis = Vector::new(axis[0], axis[1], axis[2]);
            prop_assume!(axis.norm() > 1e-3);
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
            let shift = Vector::new(t[0], t[1], t[2]);
            let m = eval::add_noise(&fixtures::icosphere(1), &eval::NoiseSpec::isotropic(0.2, 3)).unwrap();
            let moved = m.with_positions(m.positions().iter().map(|q| rot * q + shift).collect()).unwrap();
            let a = uniform_laplacian(&m).unwrap();
            let b = uniform_laplacian(&moved).unwrap();
            for (x, y) in a.vectors.iter().zip(&b.vectors) {
                prop_assert!((rot * x - y).norm() < 1e-12 * (1.0 + shift.norm()));
            }
        }
    }
}
