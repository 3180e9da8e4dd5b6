use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("vertex {0} has no neighbors")]
    IsolatedVertex(usize),
    #[error("face {0} has zero area")]
    GeometricallyDegenerateFace(usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} has {count} neighbors, at least 3 are required")]
    TooFewNeighbors { vertex: usize, count: usize },
    #[error("no half-kernel candidate of vertex {vertex} has energy below the sentinel; normalize the mesh scale")]
    NoCandidate { vertex: usize },
    #[error("face count mismatch: {left} vs {right}")]
    FaceCountMismatch { left: usize, right: usize },
    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: usize, right: usize },
    #[error("mesh is open ({boundary_vertices} boundary vertices)")]
    OpenMesh { boundary_vertices: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable name of the error kind, used as a machine-readable prefix by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegenerateFace { .. } => "DegenerateFace",
            Error::EmptyMesh => "EmptyMesh",
            Error::IsolatedVertex(_) => "IsolatedVertex",
            Error::GeometricallyDegenerateFace(_) => "GeometricallyDegenerateFace",
            Error::Parse { .. } => "ParseError",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Io(_) => "IoError",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::TooFewNeighbors { .. } => "TooFewNeighbors",
            Error::NoCandidate { .. } => "NoCandidate",
            Error::FaceCountMismatch { .. } => "FaceCountMismatch",
            Error::VertexCountMismatch { .. } => "VertexCountMismatch",
            Error::OpenMesh { .. } => "OpenMesh",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}
