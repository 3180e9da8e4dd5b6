//! Indexed triangle mesh with precomputed adjacency.

use std::collections::HashMap;
use std::sync::Arc;

use crate::{Error, Point, Result, Vector};

/// Relative degeneracy tolerance, scaled by the bounding-box diagonal.
pub const DEGENERACY_FACTOR: f64 = 1e-12;

/// Connectivity shared between meshes that differ only in vertex positions.
#[derive(Debug)]
struct Topology {
    faces: Vec<[usize; 3]>,
    vertex_neighbors: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<Vec<usize>>,
    health: MeshHealth,
}

/// Counts of topological irregularities found while building a mesh.
///
/// None of these are errors; the denoiser assumes a manifold surface but will
/// run on anything that passes [`TriMesh::new`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MeshHealth {
    /// Edges shared by more than two faces.
    pub non_manifold_edges: usize,
    /// Edges with exactly one incident face.
    pub boundary_edges: usize,
    /// Vertices not referenced by any face.
    pub unreferenced_vertices: usize,
}

/// Indexed triangle mesh.
///
/// Immutable after construction. Cloning is cheap for the connectivity part,
/// which is reference counted; [`TriMesh::with_positions`] builds a mesh with
/// the same connectivity and new coordinates.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Point>,
    topo: Arc<Topology>,
    eps: f64,
}

/// The one-ring of a vertex together with its centroid and local normal.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexNeighborhood {
    pub center: usize,
    /// Adjacent vertices in ascending index order.
    pub neighbors: Vec<usize>,
    /// Unweighted mean of the neighbor positions.
    pub centroid: Point,
    /// `normalize(position - centroid)`, or `None` when the vertex sits on
    /// its centroid within the degeneracy tolerance.
    pub local_normal: Option<Vector>,
}

impl TriMesh {
    /// Builds a mesh and all adjacency tables. Face winding is kept as given.
    pub fn new(positions: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange {
                    face: fi,
                    index,
                    vertex_count: n,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace { face: fi });
            }
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(faces.len() * 2);
        let mut edges = Vec::with_capacity(faces.len() * 3 / 2);
        let mut edge_faces: Vec<Vec<usize>> = Vec::with_capacity(faces.len() * 3 / 2);
        let mut vertex_faces = vec![Vec::new(); n];
        let mut vertex_neighbors = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for c in 0..3 {
                vertex_faces[f[c]].push(fi);
                let (a, b) = (f[c], f[(c + 1) % 3]);
                let key = if a < b { [a, b] } else { [b, a] };
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_faces.push(Vec::with_capacity(2));
                    vertex_neighbors[a].push(b);
                    vertex_neighbors[b].push(a);
                    edges.len() - 1
                });
                edge_faces[e].push(fi);
            }
        }
        for nb in &mut vertex_neighbors {
            nb.sort_unstable();
        }

        let mut boundary_vertex = vec![false; n];
        let mut health = MeshHealth::default();
        for (e, fs) in edges.iter().zip(&edge_faces) {
            match fs.len() {
                1 => {
                    health.boundary_edges += 1;
                    boundary_vertex[e[0]] = true;
                    boundary_vertex[e[1]] = true;
                }
                2 => {}
                _ => health.non_manifold_edges += 1,
            }
        }
        health.unreferenced_vertices = vertex_faces.iter().filter(|f| f.is_empty()).count();

        let eps = DEGENERACY_FACTOR * bbox_diagonal(&positions);
        Ok(TriMesh {
            positions,
            topo: Arc::new(Topology {
                faces,
                vertex_neighbors,
                vertex_faces,
                boundary_vertex,
                edges,
                edge_faces,
                health,
            }),
            eps,
        })
    }

    /// Same connectivity, new coordinates.
    pub fn with_positions(&self, positions: Vec<Point>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::LengthMismatch {
                expected: self.positions.len(),
                found: positions.len(),
            });
        }
        let eps = DEGENERACY_FACTOR * bbox_diagonal(&positions);
        Ok(TriMesh {
            positions,
            topo: Arc::clone(&self.topo),
            eps,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.topo.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.topo.faces.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.topo.vertex_neighbors[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.topo.vertex_faces[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.topo.boundary_vertex[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.topo.boundary_vertex
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.topo.boundary_vertex.iter().filter(|&&b| b).count()
    }

    /// Unique undirected edges, each stored as `[low, high]`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.topo.edges
    }

    /// Faces incident to edge `e` (index into [`TriMesh::edges`]).
    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.topo.edge_faces[e]
    }

    pub fn health(&self) -> MeshHealth {
        self.topo.health
    }

    /// Absolute degeneracy tolerance ε_n for this mesh.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.positions)
    }

    /// True when both meshes share the same connectivity object.
    pub fn same_topology(&self, other: &TriMesh) -> bool {
        Arc::ptr_eq(&self.topo, &other.topo)
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        let [a, b, c] = self.topo.faces[f];
        [self.positions[a], self.positions[b], self.positions[c]]
    }

    /// `(p1 - p0) × (p2 - p0)`; twice the area times the unit normal.
    pub fn face_cross(&self, f: usize) -> Vector {
        let [p0, p1, p2] = self.face_points(f);
        (p1 - p0).cross(&(p2 - p0))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    /// Unit face normal following the stored winding.
    pub fn face_normal(&self, f: usize) -> Result<Vector> {
        let c = self.face_cross(f);
        let norm = c.norm();
        if norm <= self.area_tolerance() {
            return Err(Error::GeometricallyDegenerateFace(f));
        }
        Ok(c / norm)
    }

    /// Threshold below which a cross-product norm counts as zero.
    pub(crate) fn area_tolerance(&self) -> f64 {
        self.eps * self.bbox_diagonal().max(f64::MIN_POSITIVE)
    }

    /// Area-weighted vertex normals; zero for vertices with no usable faces.
    pub fn vertex_normals(&self) -> Vec<Vector> {
        let mut acc = vec![Vector::zeros(); self.vertex_count()];
        for (f, face) in self.topo.faces.iter().enumerate() {
            let c = self.face_cross(f);
            for &v in face {
                acc[v] += c;
            }
        }
        for n in &mut acc {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        acc
    }

    pub fn neighborhood(&self, v: usize) -> Result<VertexNeighborhood> {
        let neighbors = self.topo.vertex_neighbors[v].clone();
        if neighbors.is_empty() {
            return Err(Error::IsolatedVertex(v));
        }
        let centroid = centroid_of(&self.positions, &neighbors);
        let offset = self.positions[v] - centroid;
        let len = offset.norm();
        let local_normal = (len >= self.eps && len > 0.0).then(|| offset / len);
        Ok(VertexNeighborhood {
            center: v,
            neighbors,
            centroid,
            local_normal,
        })
    }

    /// Arithmetic mean length of the unique undirected edges.
    pub fn mean_edge_length(&self) -> f64 {
        let edges = &self.topo.edges;
        let total: f64 = edges
            .iter()
            .map(|&[a, b]| (self.positions[a] - self.positions[b]).norm())
            .sum();
        total / edges.len() as f64
    }
}

pub(crate) fn centroid_of(positions: &[Point], indices: &[usize]) -> Point {
    let sum = indices
        .iter()
        .fold(Vector::zeros(), |acc, &k| acc + positions[k].coords);
    Point::from(sum / indices.len() as f64)
}

pub(crate) fn bbox_diagonal(positions: &[Point]) -> f64 {
    let Some(first) = positions.first() else {
        return 0.0;
    };
    let (lo, hi) = positions
        .iter()
        .fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    (hi - lo).norm()
}
