use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::par::map_range;
use crate::{Error, Parallelism, Result, TriMesh, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDirection {
    /// Independent N(0, σ²) on each coordinate.
    #[default]
    Isotropic,
    /// One N(0, σ²) sample along the area-weighted vertex normal.
    AlongNormal,
}

/// Zero-mean Gaussian noise with `σ = sigma_factor · mean_edge_length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_factor: f64,
    pub seed: u64,
    pub direction: NoiseDirection,
}

impl NoiseSpec {
    pub fn isotropic(sigma_factor: f64, seed: u64) -> Self {
        NoiseSpec {
            sigma_factor,
            seed,
            direction: NoiseDirection::Isotropic,
        }
    }
}

/// Perturbs every vertex; topology is unchanged.
///
/// Vertex `i` draws from its own ChaCha stream (`seed`, stream `i`), so the
/// result does not depend on evaluation order or thread count.
pub fn add_noise(mesh: &TriMesh, spec: &NoiseSpec) -> Result<TriMesh> {
    if !(spec.sigma_factor >= 0.0 && spec.sigma_factor.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sigma factor must be non-negative, got {}",
            spec.sigma_factor
        )));
    }
    if spec.sigma_factor == 0.0 {
        return Ok(mesh.clone());
    }
    let sigma = spec.sigma_factor * mesh.mean_edge_length();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let normals = match spec.direction {
        NoiseDirection::AlongNormal => mesh.vertex_normals(),
        NoiseDirection::Isotropic => Vec::new(),
    };
    let pos = mesh.positions();
    let next = map_range(pos.len(), Parallelism::default(), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let offset = match spec.direction {
            NoiseDirection::Isotropic => Vector::new(
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            ),
            NoiseDirection::AlongNormal => normals[i] * normal.sample(&mut rng),
        };
        pos[i] + offset
    });
    mesh.with_positions(next)
}
