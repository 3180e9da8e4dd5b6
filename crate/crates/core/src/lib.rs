//! Feature-preserving triangle-mesh denoising with the half-kernel Laplacian
//! operator (HLO).
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: the indexed triangle mesh, one-ring neighborhoods and small
//!   geometric queries.
//! - [`io`]: OBJ/OFF reading and writing, CSV scalar fields.
//! - [`laplacian`]: full-window uniform and cotangent Laplacians and the
//!   explicit diffusion-flow stepper used by every smoothing method.
//! - [`hlo`]: half-window enumeration, projected half-kernel Laplacians with
//!   energy-based selection, and the iterative denoising driver.
//! - [`eval`]: noise synthesis and quality metrics (E_v, MSAE, vertex error,
//!   mean curvature energy, flipped triangles, enclosed volume).
//! - [`fixtures`]: procedural test meshes (icosphere, subdivided cube, grids).
//!
//! Per-vertex work inside one iteration is data-parallel. With the default
//! `parallel` feature it runs on rayon; [`Parallelism::Sequential`] (or
//! building without the feature) uses a plain loop with identical results.
//!
//! ```
//! use hlo_core::{fixtures, eval, hlo};
//!
//! let clean = fixtures::icosphere(2);
//! let noisy = eval::add_noise(&clean, &eval::NoiseSpec::isotropic(0.2, 7)).unwrap();
//! let out = hlo::denoise(&noisy, &hlo::HloConfig::with_iterations(3)).unwrap();
//! assert_eq!(out.trace.len(), 3);
//! assert!(eval::msae(&out.mesh, &clean).unwrap() < eval::msae(&noisy, &clean).unwrap());
//! ```

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod hlo;
pub mod io;
pub mod laplacian;
pub mod mesh;
mod par;

pub use error::{Error, Result};
pub use mesh::{TriMesh, VertexNeighborhood};
pub use par::Parallelism;

/// Position type used throughout the crate.
pub type Point = nalgebra::Point3<f64>;
/// Displacement / Laplacian vector type.
pub type Vector = nalgebra::Vector3<f64>;
