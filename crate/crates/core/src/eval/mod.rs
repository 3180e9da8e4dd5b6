//! Noise synthesis and mesh quality metrics.

mod closest;
mod metrics;
mod noise;
mod report;

pub use closest::{closest_point_on_triangle, TriangleBvh};
pub use metrics::{
    avg_vertex_error, e_v, enclosed_volume, flipped_faces, mean_curvature_energy, msae,
    msae_detailed, FlipReport, MsaeReport, VertexError,
};
pub use noise::{add_noise, NoiseDirection, NoiseSpec};
pub use report::QualityReport;
