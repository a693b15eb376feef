//! Closed, oriented, manifold triangle meshes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{cross3, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    /// Undirected edges `(lo, hi)`.
    edges: Vec<[usize; 2]>,
    /// `face_edges[f][k]` is the edge from corner `k` to corner `k + 1`.
    face_edges: Vec<[usize; 3]>,
    /// Face on the other side of `face_edges[f][k]`.
    face_adj: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    genus: i64,
}

impl TriMesh {
    /// Validates connectivity: every edge is shared by exactly two faces with
    /// opposite orientations, every vertex has a single fan of faces, and the
    /// surface is connected.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if faces.is_empty() {
            return Err(Error::Mesh("mesh has no faces".into()));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Mesh("non-finite vertex coordinate".into()));
        }
        let mut half: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(3 * faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Mesh(format!("face {fi} repeats a vertex")));
            }
            for k in 0..3 {
                let key = (f[k], f[(k + 1) % 3]);
                if half.insert(key, (fi, k)).is_some() {
                    return Err(Error::Mesh(format!(
                        "edge ({}, {}) is used twice in the same direction (non-manifold or inconsistent orientation)",
                        key.0, key.1
                    )));
                }
            }
        }
        let mut edge_id: HashMap<(usize, usize), usize> = HashMap::with_capacity(half.len() / 2);
        let mut edges = Vec::with_capacity(half.len() / 2);
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut face_adj = vec![[0usize; 3]; faces.len()];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let Some(&(g, _)) = half.get(&(b, a)) else {
                    return Err(Error::Mesh(format!("boundary edge ({a}, {b}): mesh is not closed")));
                };
                face_adj[fi][k] = g;
                let key = (a.min(b), a.max(b));
                let id = *edge_id.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                face_edges[fi][k] = id;
            }
        }
        let mut vertex_faces = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        if let Some(v) = vertex_faces.iter().position(Vec::is_empty) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no face")));
        }
        // the faces around each vertex must form one cycle
        for (v, vf) in vertex_faces.iter().enumerate() {
            let start = vf[0];
            let mut f = start;
            let mut count = 0;
            loop {
                let k = faces[f].iter().position(|&x| x == v).expect("incident face");
                // the edge entering v is corner k-1 -> k; step across it
                f = face_adj[f][(k + 2) % 3];
                count += 1;
                if f == start || count > vf.len() {
                    break;
                }
            }
            if count != vf.len() {
                return Err(Error::Mesh(format!("vertex {v} is non-manifold")));
            }
        }
        let mut neighbors = vec![Vec::new(); nv];
        for e in &edges {
            neighbors[e[0]].push(e[1]);
            neighbors[e[1]].push(e[0]);
        }
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        // connectivity
        let mut seen = vec![false; faces.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(f) = stack.pop() {
            for &g in &face_adj[f] {
                if !seen[g] {
                    seen[g] = true;
                    reached += 1;
                    stack.push(g);
                }
            }
        }
        if reached != faces.len() {
            return Err(Error::Mesh("mesh is not connected".into()));
        }
        let chi = nv as i64 - edges.len() as i64 + faces.len() as i64;
        if chi % 2 != 0 {
            return Err(Error::Mesh(format!("odd Euler characteristic {chi}")));
        }
        Ok(Self {
            vertices,
            faces,
            edges,
            face_edges,
            face_adj,
            vertex_faces,
            neighbors,
            genus: (2 - chi) / 2,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    pub fn face_adjacency(&self) -> &[[usize; 3]] {
        &self.face_adj
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<[f64; 3]>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::LengthMismatch(vertices.len(), self.vertices.len()));
        }
        let mut m = self.clone();
        m.vertices = vertices;
        Ok(m)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        crate::linalg::dist(&self.vertices[a], &self.vertices[b])
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edges.len()).map(|e| self.edge_length(e)).collect()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        0.5 * norm(&cross3(&u, &w))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed enclosed volume; positive for outward-facing orientation.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|v| self.vertices[v]);
                crate::linalg::det3(&a, &b, &c) / 6.0
            })
            .sum()
    }

    /// Point of face `f` with barycentric coordinates `bary`.
    pub fn point_at(&self, f: usize, bary: &[f64; 3]) -> [f64; 3] {
        let [a, b, c] = self.faces[f].map(|v| self.vertices[v]);
        std::array::from_fn(|i| bary[0] * a[i] + bary[1] * b[i] + bary[2] * c[i])
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for i in 0..3 {
                c[i] += v[i] / n;
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tetrahedron() -> TriMesh {
        let v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        TriMesh::new(v, f).unwrap()
    }

    #[test]
    fn tetrahedron_is_sphere() {
        let t = tetrahedron();
        assert_eq!(t.num_vertices(), 4);
        assert_eq!(t.num_faces(), 4);
        assert_eq!(t.edges().len(), 6);
        assert_eq!(t.genus(), 0);
        assert!(t.signed_volume() > 0.0);
        assert_eq!(t.neighbors(0), &[1, 2, 3]);
    }

    #[test]
    fn rejects_open_and_bad_meshes() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let open = TriMesh::new(v.clone(), vec![[0, 1, 2], [0, 3, 1], [0, 2, 3]]);
        assert!(matches!(open, Err(Error::Mesh(m)) if m.contains("boundary")));
        let flipped = TriMesh::new(v.clone(), vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 3, 2]]);
        assert!(flipped.is_err());
        assert!(TriMesh::new(v.clone(), vec![[0, 1, 7]]).is_err());
        assert!(TriMesh::new(v, vec![[0, 0, 1]]).is_err());
    }

    #[test]
    fn rejects_pinched_vertex() {
        // two tetrahedra sharing one vertex
        let mut v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        v.extend([[3.0, 3.0, 3.0], [3.0, 1.0, 1.0], [1.0, 3.0, 1.0]]);
        let f = vec![
            [0, 1, 2],
            [0, 3, 1],
            [0, 2, 3],
            [1, 3, 2],
            [0, 4, 5],
            [0, 6, 4],
            [0, 5, 6],
            [4, 6, 5],
        ];
        let r = TriMesh::new(v, f);
        assert!(matches!(r, Err(Error::Mesh(m)) if m.contains("non-manifold")));
    }
}
