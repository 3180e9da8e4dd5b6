use std::fmt;

use super::metrics::{
    avg_vertex_error, e_v, enclosed_volume, flipped_faces, mean_curvature_energy, msae,
};
use crate::{Result, TriMesh};

/// Summary of one denoising result against its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub e_v: f64,
    /// Radians squared.
    pub msae: f64,
    pub avg_vertex_error: f64,
    pub mean_curvature_energy: f64,
    pub flipped_faces: usize,
    /// `None` for open meshes.
    pub enclosed_volume: Option<f64>,
    pub runtime_seconds: f64,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str =
        "e_v,msae,avg_vertex_error,mean_curvature_energy,flipped_faces,enclosed_volume,runtime_seconds";

    /// Evaluates every metric of `denoised` against `ground_truth`, which must
    /// share vertex and face indexing.
    pub fn evaluate(
        denoised: &TriMesh,
        ground_truth: &TriMesh,
        runtime_seconds: f64,
    ) -> Result<Self> {
        Ok(QualityReport {
            e_v: e_v(denoised, ground_truth)?,
            msae: msae(denoised, ground_truth)?,
            avg_vertex_error: avg_vertex_error(denoised, ground_truth)?.mean,
            mean_curvature_energy: mean_curvature_energy(denoised)?,
            flipped_faces: flipped_faces(denoised, Some(ground_truth))?.count,
            enclosed_volume: enclosed_volume(denoised).ok(),
            runtime_seconds,
        })
    }

    /// One CSV row in [`QualityReport::CSV_HEADER`] order; an open mesh leaves
    /// the volume column empty.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.e_v,
            self.msae,
            self.avg_vertex_error,
            self.mean_curvature_energy,
            self.flipped_faces,
            self.enclosed_volume
                .map(|v| v.to_string())
                .unwrap_or_default(),
            self.runtime_seconds
        )
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "E_v                    {:.6e}", self.e_v)?;
        writeln!(f, "MSAE (rad^2)           {:.6e}", self.msae)?;
        writeln!(f, "avg vertex error       {:.6e}", self.avg_vertex_error)?;
        writeln!(
            f,
            "mean curvature energy  {:.6}",
            self.mean_curvature_energy
        )?;
        writeln!(f, "flipped faces          {}", self.flipped_faces)?;
        match self.enclosed_volume {
            Some(v) => writeln!(f, "enclosed volume        {v:.6}")?,
            None => writeln!(f, "enclosed volume        n/a (open mesh)")?,
        }
        write!(f, "runtime (s)            {:.4}", self.runtime_seconds)
    }
}
