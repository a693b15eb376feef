//! Layouts of a mesh (or a patch of it) on `S^2` or `H^2`, restriction of
//! mesh samples onto a layout and the ray-shooting map back to the mesh.

use std::collections::VecDeque;

use super::bvh::Bvh;
use super::yamabe::{hyperbolic_angles, hyperbolic_lengths, ConformalFactors};
use super::{MeshSample, TriMesh};
use crate::error::{Error, Result};
use crate::linalg::{self, det3};
use crate::manifold::hyperbolic;
use crate::sampler::{DiscreteMeasure, Space};

/// Barycentric slack accepted when shooting rays through shared edges.
pub const RAY_TOL: f64 = 1e-9;

/// Distance under which two placements of a vertex count as the same.
const LIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    Sphere,
    Hyperbolic,
}

impl LayoutKind {
    pub fn space(self) -> Space {
        match self {
            LayoutKind::Sphere => Space::Sphere,
            LayoutKind::Hyperbolic => Space::Hyperbolic,
        }
    }
}

/// A placed mesh face; corners follow the mesh face's vertex order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedFace {
    pub face: usize,
    pub corners: [[f64; 3]; 3],
}

#[derive(Debug, Clone)]
pub struct Layout {
    kind: LayoutKind,
    origin: Option<usize>,
    vertices: Vec<Option<[f64; 3]>>,
    faces: Vec<PlacedFace>,
    slot: Vec<Option<usize>>,
    bvh: Bvh,
}

/// Samples that fall on a layout, with their index in the input list.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub points: Vec<[f64; 3]>,
    pub index: Vec<usize>,
}

impl Restriction {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `None` when no sample landed on the layout.
    pub fn measure(&self, space: Space) -> Option<DiscreteMeasure> {
        if self.points.is_empty() {
            return None;
        }
        Some(DiscreteMeasure::from_flat_raw(space, 3, self.points.iter().flatten().copied().collect()))
    }
}

impl Layout {
    fn assemble(kind: LayoutKind, origin: Option<usize>, nv: usize, nf: usize, faces: Vec<PlacedFace>) -> Self {
        let vertices = vec![None; nv];
        let mut slot = vec![None; nf];
        for (i, pf) in faces.iter().enumerate() {
            slot[pf.face] = Some(i);
        }
        let bvh = Bvh::new(faces.iter().map(|f| f.corners).collect());
        Self { kind, origin, vertices, faces, slot, bvh }
    }

    /// Spherical layout of the whole mesh from per-vertex positions, which
    /// are normalized onto the sphere.
    pub fn spherical(mesh: &TriMesh, positions: &[[f64; 3]]) -> Result<Self> {
        if positions.len() != mesh.num_vertices() {
            return Err(Error::LengthMismatch(positions.len(), mesh.num_vertices()));
        }
        let mut pos = positions.to_vec();
        for p in &mut pos {
            let n = linalg::normalize(p);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Mesh("layout vertex at the origin".into()));
            }
        }
        let faces = mesh
            .faces()
            .iter()
            .enumerate()
            .map(|(f, c)| PlacedFace { face: f, corners: c.map(|v| pos[v]) })
            .collect();
        let mut l = Self::assemble(LayoutKind::Sphere, None, mesh.num_vertices(), mesh.num_faces(), faces);
        l.vertices = pos.into_iter().map(Some).collect();
        Ok(l)
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    /// Vertex placed at the hyperboloid origin.
    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    /// First placement of vertex `v`.
    pub fn vertex(&self, v: usize) -> Option<[f64; 3]> {
        self.vertices[v]
    }

    pub fn placed_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.iter().enumerate().filter(|(_, p)| p.is_some()).map(|(v, _)| v)
    }

    pub fn faces(&self) -> &[PlacedFace] {
        &self.faces
    }

    pub fn placed_face(&self, f: usize) -> Option<&PlacedFace> {
        self.slot[f].map(|i| &self.faces[i])
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Maps samples on placed faces to the manifold: barycentric combination
    /// of the corners, then normalization.
    pub fn restrict(&self, samples: &[MeshSample]) -> Restriction {
        let mut out = Restriction { points: Vec::new(), index: Vec::new() };
        for (i, s) in samples.iter().enumerate() {
            if let Some(pf) = self.placed_face(s.face) {
                let mut p = [0.0; 3];
                for (c, b) in pf.corners.iter().zip(&s.bary) {
                    linalg::axpy(*b, c, &mut p);
                }
                self.normalize(&mut p);
                out.points.push(p);
                out.index.push(i);
            }
        }
        out
    }

    fn normalize(&self, p: &mut [f64; 3]) {
        match self.kind {
            LayoutKind::Sphere => {
                linalg::normalize(p);
            }
            LayoutKind::Hyperbolic => hyperbolic::renormalize(p),
        }
    }

    /// Shoots a ray from the ambient origin through `p`; the hit face's
    /// Euclidean barycentric coordinates transfer the point to the mesh.
    pub fn map_point(&self, mesh: &TriMesh, p: &[f64; 3]) -> Option<MeshSample> {
        let hit = self.bvh.cast(p, RAY_TOL)?;
        Some(MeshSample::from_parts(mesh, self.faces[hit.triangle].face, hit.bary))
    }

    /// [`Layout::map_point`] for every atom; misses are `None`.
    pub fn map_to_mesh(&self, mesh: &TriMesh, points: &[[f64; 3]]) -> Vec<Option<MeshSample>> {
        use rayon::prelude::*;
        points.par_iter().map(|p| self.map_point(mesh, p)).collect()
    }

    /// Largest deviation of a placed edge's hyperbolic length from the
    /// flow's `l'_ij`.
    pub fn max_edge_error(&self, mesh: &TriMesh, u: &ConformalFactors) -> f64 {
        let len = hyperbolic_lengths(mesh, &u.u);
        let mut worst: f64 = 0.0;
        for pf in &self.faces {
            for k in 0..3 {
                let e = mesh.face_edges()[pf.face][k];
                let d = hyperbolic::dist_raw(&pf.corners[k], &pf.corners[(k + 1) % 3]);
                worst = worst.max((d - len[e]).abs());
            }
        }
        worst
    }
}

/// Places `c` given `a`, `b` in winding order `(a, b, c)`.
fn place_third(pa: &[f64; 3], pb: &[f64; 3], sides: [f64; 3]) -> Option<[f64; 3]> {
    // sides: opposite a, opposite b, opposite c
    let ang = hyperbolic_angles(sides)?;
    let mut u = [0.0; 3];
    hyperbolic::log_into(pa, pb, &mut u);
    let nu = lorentz_norm(&u);
    if !(nu > 0.0) {
        return None;
    }
    u.iter_mut().for_each(|x| *x /= nu);
    // Lorentz cross product: tangent at a, orthogonal to u
    let c = linalg::cross3(pa, &u);
    let mut w = [c[0], c[1], -c[2]];
    let nw = lorentz_norm(&w);
    w.iter_mut().for_each(|x| *x /= nw);
    let (s, co) = ang[0].sin_cos();
    let mut best = None;
    for sign in [1.0, -1.0] {
        let v: [f64; 3] = std::array::from_fn(|k| sides[1] * (co * u[k] + sign * s * w[k]));
        let mut pc = [0.0; 3];
        hyperbolic::exp_into(pa, &v, &mut pc);
        if det3(pa, pb, &pc) > 0.0 {
            best = Some(pc);
        }
    }
    best
}

fn lorentz_norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] - v[2] * v[2]).max(0.0).sqrt()
}

/// Breadth-first hyperbolic layout around `v0` using the lengths of the
/// conformal factors `u`. Faces with a corner whose time coordinate exceeds
/// `eps` are skipped, as are faces that would place a vertex a second time at
/// a different point, so every vertex and face appears at most once and the
/// patch has no internal seams.
pub fn build_local_layout(mesh: &TriMesh, u: &ConformalFactors, v0: usize, eps: f64) -> Result<Layout> {
    if !(eps > 1.0) {
        return Err(Error::InvalidConfig(format!("layout threshold {eps} must exceed 1")));
    }
    if v0 >= mesh.num_vertices() {
        return Err(Error::Mesh(format!("vertex {v0} out of range")));
    }
    if u.u.len() != mesh.num_vertices() {
        return Err(Error::LengthMismatch(u.u.len(), mesh.num_vertices()));
    }
    let len = hyperbolic_lengths(mesh, &u.u);
    let sides = |f: usize, k: usize| {
        // sides of face f seen from corner k, ordered opposite (k, k+1, k+2)
        let fe = mesh.face_edges()[f];
        [len[fe[(k + 1) % 3]], len[fe[(k + 2) % 3]], len[fe[k]]]
    };
    let nf = mesh.num_faces();
    let mut slot: Vec<Option<usize>> = vec![None; nf];
    let mut faces: Vec<PlacedFace> = Vec::new();
    let mut vertices: Vec<Option<[f64; 3]>> = vec![None; mesh.num_vertices()];
    let mut queue = VecDeque::new();
    let fits = |p: &[f64; 3]| p[2] <= eps;

    let origin = [0.0, 0.0, 1.0];
    vertices[v0] = Some(origin);
    let f0 = mesh.vertex_faces(v0)[0];
    let k0 = mesh.faces()[f0].iter().position(|&v| v == v0).unwrap();
    let lab = len[mesh.face_edges()[f0][k0]];
    let pb = [lab.sinh(), 0.0, lab.cosh()];
    if fits(&pb) {
        let s = sides(f0, k0);
        let pc = place_third(&origin, &pb, s).ok_or(Error::TriangleInequality(f0))?;
        if fits(&pc) {
            let mut corners = [[0.0; 3]; 3];
            corners[k0] = origin;
            corners[(k0 + 1) % 3] = pb;
            corners[(k0 + 2) % 3] = pc;
            vertices[mesh.faces()[f0][(k0 + 1) % 3]] = Some(pb);
            vertices[mesh.faces()[f0][(k0 + 2) % 3]] = Some(pc);
            slot[f0] = Some(0);
            faces.push(PlacedFace { face: f0, corners });
            queue.push_back(f0);
        }
    }
    while let Some(f) = queue.pop_front() {
        let pf = faces[slot[f].unwrap()];
        for k in 0..3 {
            let g = mesh.face_adjacency()[f][k];
            if slot[g].is_some() {
                continue;
            }
            // shared edge runs x -> y in f and y -> x in g
            let (x, y) = (mesh.faces()[f][k], mesh.faces()[f][(k + 1) % 3]);
            let (px, py) = (pf.corners[k], pf.corners[(k + 1) % 3]);
            let gy = mesh.faces()[g].iter().position(|&v| v == y).unwrap();
            debug_assert_eq!(mesh.faces()[g][(gy + 1) % 3], x);
            let pz = place_third(&py, &px, sides(g, gy)).ok_or(Error::TriangleInequality(g))?;
            if !fits(&pz) {
                continue;
            }
            // a second lift of an already placed vertex would cut the patch
            let z = mesh.faces()[g][(gy + 2) % 3];
            if vertices[z].is_some_and(|p| hyperbolic::dist_raw(&p, &pz) > LIFT_TOL) {
                continue;
            }
            vertices[z] = Some(pz);
            let mut corners = [[0.0; 3]; 3];
            corners[gy] = py;
            corners[(gy + 1) % 3] = px;
            corners[(gy + 2) % 3] = pz;
            slot[g] = Some(faces.len());
            faces.push(PlacedFace { face: g, corners });
            queue.push_back(g);
        }
    }
    let mut l = Layout::assemble(LayoutKind::Hyperbolic, Some(v0), mesh.num_vertices(), nf, faces);
    l.vertices = vertices;
    Ok(l)
}
