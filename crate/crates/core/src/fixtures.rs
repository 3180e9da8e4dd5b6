//! Procedural meshes used by tests, benchmarks and the CLI `generate` command.

use std::collections::HashMap;

use crate::{Point, TriMesh};

fn build(positions: Vec<Point>, faces: Vec<[usize; 3]>) -> TriMesh {
    TriMesh::new(positions, faces).expect("fixture meshes are valid")
}

pub fn single_triangle() -> TriMesh {
    build(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )
}

/// Unit square split along the diagonal from vertex 0 to vertex 2.
pub fn unit_square() -> TriMesh {
    build(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
}

/// Regular octahedron with vertices on the coordinate axes, outward winding.
pub fn octahedron() -> TriMesh {
    let positions = vec![
        Point::new(1.0, 0.0, 0.0),
        Point::new(-1.0, 0.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
        Point::new(0.0, -1.0, 0.0),
        Point::new(0.0, 0.0, 1.0),
        Point::new(0.0, 0.0, -1.0),
    ];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    build(positions, faces)
}

/// Apex vertex 0 at `(0, 0, height)` over six vertices evenly spaced on the
/// unit circle in the `z = 0` plane. Open fan; only the apex is interior.
pub fn hexagon_fan(height: f64) -> TriMesh {
    ngon_fan(6, height)
}

/// Apex vertex 0 at `(0, 0, height)` over `sides` ring vertices on the unit
/// circle, the first at angle 0.
pub fn ngon_fan(sides: usize, height: f64) -> TriMesh {
    assert!(sides >= 3);
    let mut positions = vec![Point::new(0.0, 0.0, height)];
    for k in 0..sides {
        let a = std::f64::consts::TAU / sides as f64 * k as f64;
        positions.push(Point::new(a.cos(), a.sin(), 0.0));
    }
    let faces = (0..sides)
        .map(|k| [0, 1 + k, 1 + (k + 1) % sides])
        .collect();
    build(positions, faces)
}

/// Planar grid over `[0, 1] x [0, 1]` at `z = 0` with `n x n` quads, each
/// split along the same diagonal. Interior vertices have six neighbors placed
/// point-symmetrically.
pub fn plane_grid(n: usize) -> TriMesh {
    assert!(n >= 1);
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut positions = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            positions.push(Point::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    build(positions, faces)
}

/// Closed axis-aligned unit cube `[0, 1]^3` with `segments` quads per edge on
/// every side, outward winding.
pub fn unit_cube(segments: usize) -> TriMesh {
    assert!(segments >= 1);
    let n = segments;
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    let mut vertex = |g: [usize; 3], positions: &mut Vec<Point>| -> usize {
        *index.entry(g).or_insert_with(|| {
            positions.push(Point::new(
                g[0] as f64 / n as f64,
                g[1] as f64 / n as f64,
                g[2] as f64 / n as f64,
            ));
            positions.len() - 1
        })
    };
    for axis in 0..3 {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        for positive in [false, true] {
            let grid = |u: usize, v: usize| {
                let mut g = [0; 3];
                g[axis] = if positive { n } else { 0 };
                g[b] = u;
                g[c] = v;
                g
            };
            for v in 0..n {
                for u in 0..n {
                    let q = [
                        vertex(grid(u, v), &mut positions),
                        vertex(grid(u + 1, v), &mut positions),
                        vertex(grid(u + 1, v + 1), &mut positions),
                        vertex(grid(u, v + 1), &mut positions),
                    ];
                    if positive {
                        faces.push([q[0], q[1], q[2]]);
                        faces.push([q[0], q[2], q[3]]);
                    } else {
                        faces.push([q[0], q[2], q[1]]);
                        faces.push([q[0], q[3], q[2]]);
                    }
                }
            }
        }
    }
    build(positions, faces)
}

/// Unit icosphere: an icosahedron with `level` rounds of midpoint subdivision,
/// projected onto the unit sphere. Vertex count is `10 * 4^level + 2`
/// (level 4 gives 2562, level 5 gives 10242).
pub fn icosphere(level: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Point> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Point::from(nalgebra::Vector3::from(*c).normalize()))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, positions: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (positions[a].coords + positions[b].coords).normalize();
                positions.push(Point::from(m));
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut positions);
            let bc = mid(b, c, &mut positions);
            let ca = mid(c, a, &mut positions);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(positions, faces)
}
