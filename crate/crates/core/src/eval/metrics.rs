use crate::laplacian::cotangent_laplacian;
use crate::par::map_range;
use crate::{Error, Parallelism, Result, TriMesh, Vector};

use super::closest::TriangleBvh;

fn same_faces(a: &TriMesh, b: &TriMesh) -> Result<()> {
    if a.face_count() != b.face_count() {
        return Err(Error::FaceCountMismatch {
            left: a.face_count(),
            right: b.face_count(),
        });
    }
    Ok(())
}

fn same_vertices(a: &TriMesh, b: &TriMesh) -> Result<()> {
    if a.vertex_count() != b.vertex_count() {
        return Err(Error::VertexCountMismatch {
            left: a.vertex_count(),
            right: b.vertex_count(),
        });
    }
    Ok(())
}

/// Area-weighted L² vertex-to-surface error.
///
/// `E_v = sqrt( Σ_i (Σ_{j ∋ i} A_j) · dist(x_i, T)² / (3 Σ_k A_k) )`, where the
/// areas `A` are those of the denoised mesh and `dist` is the exact distance
/// from denoised vertex `x_i` to the closest triangle of `reference`. The
/// reference may have a different topology.
pub fn e_v(denoised: &TriMesh, reference: &TriMesh) -> Result<f64> {
    let areas: Vec<f64> = (0..denoised.face_count())
        .map(|f| denoised.face_area(f))
        .collect();
    let total: f64 = areas.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyMesh);
    }
    let bvh = TriangleBvh::new(reference);
    let terms = map_range(denoised.vertex_count(), Parallelism::default(), |i| {
        let weight: f64 = denoised.vertex_faces(i).iter().map(|&f| areas[f]).sum();
        if weight == 0.0 {
            return 0.0;
        }
        weight * bvh.closest(denoised.position(i)).1
    });
    Ok((terms.iter().sum::<f64>() / (3.0 * total)).sqrt())
}

/// Mean squared angular error with per-face detail.
#[derive(Debug, Clone, PartialEq)]
pub struct MsaeReport {
    /// Radians squared.
    pub msae: f64,
    /// Per-face angle θ_k in radians.
    pub angles: Vec<f64>,
    /// Faces with a zero-area triangle on either side; they contribute θ = 0.
    pub degenerate_faces: usize,
}

/// `Σ θ_k² / N_F` over corresponding faces.
pub fn msae(denoised: &TriMesh, reference: &TriMesh) -> Result<f64> {
    msae_detailed(denoised, reference).map(|r| r.msae)
}

pub fn msae_detailed(denoised: &TriMesh, reference: &TriMesh) -> Result<MsaeReport> {
    same_faces(denoised, reference)?;
    let mut degenerate_faces = 0;
    let angles: Vec<f64> = (0..denoised.face_count())
        .map(
            |f| match (denoised.face_normal(f), reference.face_normal(f)) {
                (Ok(a), Ok(b)) => a.cross(&b).norm().atan2(a.dot(&b)),
                _ => {
                    degenerate_faces += 1;
                    0.0
                }
            },
        )
        .collect();
    let msae = angles.iter().map(|t| t * t).sum::<f64>() / angles.len() as f64;
    Ok(MsaeReport {
        msae,
        angles,
        degenerate_faces,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipReport {
    pub count: usize,
    pub faces: Vec<usize>,
}

/// Flipped triangles.
///
/// With a reference, face `k` is flipped when its normal points against the
/// reference normal. Without one, it is flipped when its normal points against
/// the mean normal of its edge-adjacent faces.
pub fn flipped_faces(mesh: &TriMesh, reference: Option<&TriMesh>) -> Result<FlipReport> {
    let faces: Vec<usize> = match reference {
        Some(r) => {
            same_faces(mesh, r)?;
            (0..mesh.face_count())
                .filter(|&f| mesh.face_cross(f).dot(&r.face_cross(f)) < 0.0)
                .collect()
        }
        None => {
            let unit: Vec<Vector> = (0..mesh.face_count())
                .map(|f| mesh.face_normal(f).unwrap_or_else(|_| Vector::zeros()))
                .collect();
            let mut around = vec![Vector::zeros(); mesh.face_count()];
            for e in 0..mesh.edges().len() {
                let fs = mesh.edge_faces(e);
                for &a in fs {
                    for &b in fs {
                        if a != b {
                            around[a] += unit[b];
                        }
                    }
                }
            }
            (0..mesh.face_count())
                .filter(|&f| unit[f].dot(&around[f]) < 0.0)
                .collect()
        }
    };
    Ok(FlipReport {
        count: faces.len(),
        faces,
    })
}

/// One-to-one vertex error against a ground truth with identical indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexError {
    /// Mean of `‖v_denoised - v_gt‖`.
    pub mean: f64,
    /// `(v_denoised - v_gt) · n_gt` per vertex, with `n_gt` the area-weighted
    /// ground-truth normal. Positive means outward.
    pub signed: Vec<f64>,
}

pub fn avg_vertex_error(denoised: &TriMesh, ground_truth: &TriMesh) -> Result<VertexError> {
    same_vertices(denoised, ground_truth)?;
    let normals = ground_truth.vertex_normals();
    let mut total = 0.0;
    let signed = denoised
        .positions()
        .iter()
        .zip(ground_truth.positions())
        .zip(&normals)
        .map(|((d, g), n)| {
            let diff = d - g;
            total += diff.norm();
            diff.dot(n)
        })
        .collect();
    Ok(VertexError {
        mean: total / denoised.vertex_count() as f64,
        signed,
    })
}

/// Sum over interior vertices of the normalized cotangent Laplacian
/// magnitude. Boundary vertices are skipped: their Laplacian measures the
/// curvature of the boundary curve, not of the surface.
pub fn mean_curvature_energy(mesh: &TriMesh) -> Result<f64> {
    let field = cotangent_laplacian(mesh)?;
    Ok(field
        .vectors
        .iter()
        .zip(mesh.boundary_flags())
        .filter(|(_, &b)| !b)
        .map(|(d, _)| d.norm())
        .sum())
}

/// Signed volume `Σ p0 · (p1 × p2) / 6`; positive for outward winding.
pub fn enclosed_volume(mesh: &TriMesh) -> Result<f64> {
    let boundary_vertices = mesh.boundary_vertex_count();
    if boundary_vertices > 0 {
        return Err(Error::OpenMesh { boundary_vertices });
    }
    Ok((0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.face_points(f);
            a.coords.dot(&b.coords.cross(&c.coords))
        })
        .sum::<f64>()
        / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{add_noise, NoiseSpec};
    use crate::{fixtures, hlo, laplacian, Point};
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn reversed(m: &TriMesh, which: impl Fn(usize) -> bool) -> TriMesh {
        let faces = m
            .faces()
            .iter()
            .enumerate()
            .map(|(i, &[a, b, c])| if which(i) { [a, c, b] } else { [a, b, c] })
            .collect();
        TriMesh::new(m.positions().to_vec(), faces).unwrap()
    }

    fn transformed(m: &TriMesh, f: impl Fn(&Point) -> Point) -> TriMesh {
        m.with_positions(m.positions().iter().map(f).collect())
            .unwrap()
    }

    #[test]
    fn identical_meshes_score_zero() {
        let m = add_noise(&fixtures::icosphere(2), &NoiseSpec::isotropic(0.3, 1)).unwrap();
        assert_eq!(e_v(&m, &m).unwrap(), 0.0);
        assert_eq!(msae(&m, &m).unwrap(), 0.0);
        assert_eq!(flipped_faces(&m, Some(&m)).unwrap().count, 0);
        let err = avg_vertex_error(&m, &m).unwrap();
        assert_eq!(err.mean, 0.0);
        assert!(err.signed.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn e_v_is_homogeneous() {
        let gt = fixtures::icosphere(2);
        let d = add_noise(&gt, &NoiseSpec::isotropic(0.3, 2)).unwrap();
        let base = e_v(&d, &gt).unwrap();
        let s2 = |m: &TriMesh| transformed(m, |p| p * 2.0);
        assert_relative_eq!(
            e_v(&s2(&d), &s2(&gt)).unwrap(),
            2.0 * base,
            max_relative = 1e-12
        );
        // scaling only the reference changes the metric
        assert!((e_v(&d, &s2(&gt)).unwrap() - base).abs() > 1e-3);
    }

    #[test]
    fn e_v_height_above_triangle() {
        let gt = fixtures::single_triangle();
        let h = 0.37;
        let lifted = transformed(&gt, |p| p + Vector::z() * h);
        assert_relative_eq!(e_v(&lifted, &gt).unwrap(), h, epsilon = 1e-15);
    }

    #[test]
    fn e_v_rigid_invariant() {
        let gt = fixtures::icosphere(2);
        let d = add_noise(&gt, &NoiseSpec::isotropic(0.3, 3)).unwrap();
        let rot =
            Rotation3::from_axis_angle(&Unit::new_normalize(Vector::new(1.0, 2.0, -0.5)), 0.8);
        let t = Vector::new(3.0, -1.0, 2.0);
        let mv = |m: &TriMesh| transformed(m, |p| rot * p + t);
        assert_relative_eq!(
            e_v(&mv(&d), &mv(&gt)).unwrap(),
            e_v(&d, &gt).unwrap(),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            msae(&mv(&d), &mv(&gt)).unwrap(),
            msae(&d, &gt).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn msae_rotated_ninety_degrees() {
        let sq = fixtures::unit_square();
        let rot = Rotation3::from_axis_angle(&Vector::x_axis(), FRAC_PI_2);
        let r = transformed(&sq, |p| rot * p);
        assert_relative_eq!(
            msae(&r, &sq).unwrap(),
            FRAC_PI_2 * FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn msae_one_face_flipped() {
        let sq = fixtures::unit_square();
        let flipped = reversed(&sq, |f| f == 0);
        assert_relative_eq!(msae(&flipped, &sq).unwrap(), PI * PI / 2.0, epsilon = 1e-12);
        assert!(matches!(
            msae(&fixtures::octahedron(), &sq),
            Err(Error::FaceCountMismatch { .. })
        ));
    }

    #[test]
    fn msae_degenerate_faces_counted() {
        let sq = fixtures::unit_square();
        let mut pts = sq.positions().to_vec();
        pts[1] = Point::new(0.5, 0.5, 0.0);
        let bad = sq.with_positions(pts).unwrap();
        let r = msae_detailed(&bad, &sq).unwrap();
        assert_eq!(r.degenerate_faces, 1);
        assert_eq!(r.angles[0], 0.0);
    }

    #[test]
    fn flips_with_and_without_reference() {
        let s = fixtures::icosphere(2);
        assert_eq!(flipped_faces(&s, None).unwrap().count, 0);
        let f = reversed(&s, |i| i == 17);
        assert_eq!(flipped_faces(&f, Some(&s)).unwrap().faces, vec![17]);
        assert_eq!(flipped_faces(&s, Some(&f)).unwrap().faces, vec![17]);
        assert_eq!(flipped_faces(&f, None).unwrap().faces, vec![17]);
    }

    #[test]
    fn flips_unfold_under_hlo() {
        let clean = fixtures::icosphere(3);
        let noisy = add_noise(&clean, &NoiseSpec::isotropic(0.7, 21)).unwrap();
        let before = flipped_faces(&noisy, Some(&clean)).unwrap().count;
        let out = hlo::denoise(&noisy, &hlo::HloConfig::with_iterations(10)).unwrap();
        let after = flipped_faces(&out.mesh, Some(&clean)).unwrap().count;
        assert!(before > 0);
        assert!(after < before, "{before} -> {after}");
    }

    #[test]
    fn vertex_error_along_normal() {
        let gt = fixtures::icosphere(2);
        let normals = gt.vertex_normals();
        let eps = 0.01;
        let moved = gt
            .with_positions(
                gt.positions()
                    .iter()
                    .zip(&normals)
                    .map(|(p, n)| p + n * eps)
                    .collect(),
            )
            .unwrap();
        let err = avg_vertex_error(&moved, &gt).unwrap();
        assert_relative_eq!(err.mean, eps, epsilon = 1e-15);
        assert!(err.signed.iter().all(|&s| (s - eps).abs() < 1e-15));
        assert!(matches!(
            avg_vertex_error(&gt, &fixtures::octahedron()),
            Err(Error::VertexCountMismatch { .. })
        ));
    }

    #[test]
    fn hlo_beats_uniform_on_vertex_error() {
        let clean = fixtures::icosphere(3);
        let noisy = add_noise(&clean, &NoiseSpec::isotropic(0.2, 5)).unwrap();
        let h = hlo::denoise(&noisy, &hlo::HloConfig::with_iterations(10)).unwrap();
        let u = laplacian::smooth(
            &noisy,
            laplacian::LaplacianKind::Uniform,
            &laplacian::FlowConfig::with_iterations(10),
        )
        .unwrap();
        let eh = avg_vertex_error(&h.mesh, &clean).unwrap().mean;
        let eu = avg_vertex_error(&u.mesh, &clean).unwrap().mean;
        assert!(eh < eu, "hlo {eh} uniform {eu}");
    }

    #[test]
    fn curvature_energy_flat_and_first_iteration_drop() {
        let g = fixtures::plane_grid(8);
        assert!(mean_curvature_energy(&g).unwrap() < 1e-6 * g.bbox_diagonal());

        let clean = fixtures::icosphere(4);
        let noisy = add_noise(&clean, &NoiseSpec::isotropic(0.2, 6)).unwrap();
        let before = mean_curvature_energy(&noisy).unwrap();
        let h = hlo::denoise(&noisy, &hlo::HloConfig::with_iterations(1)).unwrap();
        let u = laplacian::smooth(
            &noisy,
            laplacian::LaplacianKind::Uniform,
            &laplacian::FlowConfig::default(),
        )
        .unwrap();
        let (eh, eu) = (
            mean_curvature_energy(&h.mesh).unwrap(),
            mean_curvature_energy(&u.mesh).unwrap(),
        );
        // measured: uniform keeps 0.36 of the energy, HLO 0.63
        assert!(eu < 0.5 * before, "before {before} uniform {eu}");
        assert!(eh < 0.7 * before, "before {before} hlo {eh}");
    }

    #[test]
    fn curvature_energy_converges_under_refinement() {
        // For a near-equilateral sphere tessellation the normalized cotangent
        // Laplacian has magnitude ≈ H h² / 2 per vertex, so the sum tends to
        // 4π / √3 on the unit sphere.
        let limit = 4.0 * PI / 3f64.sqrt();
        let energies: Vec<f64> = (1..=4)
            .map(|l| mean_curvature_energy(&fixtures::icosphere(l)).unwrap())
            .collect();
        let gaps: Vec<f64> = energies.iter().map(|e| (e - limit).abs()).collect();
        assert!(energies.windows(2).all(|w| w[1] > w[0]), "{energies:?}");
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
    }

    #[test]
    fn volumes() {
        assert_relative_eq!(
            enclosed_volume(&fixtures::unit_cube(1)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            enclosed_volume(&fixtures::unit_cube(5)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let rev = reversed(&fixtures::unit_cube(1), |_| true);
        assert_relative_eq!(enclosed_volume(&rev).unwrap(), -1.0, epsilon = 1e-12);
        let ball = 4.0 / 3.0 * PI;
        let v: Vec<f64> = (1..=4)
            .map(|l| enclosed_volume(&fixtures::icosphere(l)).unwrap())
            .collect();
        assert!(v.iter().all(|&x| x < ball));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(matches!(
            enclosed_volume(&fixtures::plane_grid(2)),
            Err(Error::OpenMesh { .. })
        ));
    }
}
