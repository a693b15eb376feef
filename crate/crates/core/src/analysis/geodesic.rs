//! Graph approximation of geodesic distances between points on a mesh.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::SeedableRng;
use rayon::prelude::*;

use super::pcf::{pair_correlation, PcfReport, Reference};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{sample_faces, Density, MeshSample, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Key(f64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest paths on the graph of mesh vertices plus sample points. Samples
/// connect to their face's corners and to the other samples of their face
/// with straight in-face segments. Returns `D[s][t]`.
pub fn mesh_geodesic_distances(mesh: &TriMesh, sources: &[MeshSample], targets: &[MeshSample]) -> Result<Vec<Vec<f64>>> {
    let nv = mesh.num_vertices();
    let pts: Vec<&MeshSample> = sources.iter().chain(targets).collect();
    for s in &pts {
        if s.face >= mesh.num_faces() {
            return Err(Error::Mesh(format!("sample on missing face {}", s.face)));
        }
    }
    let n = nv + pts.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let l = mesh.edge_length(e);
        adj[a].push((b, l));
        adj[b].push((a, l));
    }
    let mut by_face: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, s) in pts.iter().enumerate() {
        let node = nv + k;
        for &v in &mesh.faces()[s.face] {
            let l = linalg::dist(&s.position, &mesh.vertices()[v]);
            adj[node].push((v, l));
            adj[v].push((node, l));
        }
        by_face.entry(s.face).or_default().push(k);
    }
    for group in by_face.values() {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                let l = linalg::dist(&pts[a].position, &pts[b].position);
                adj[nv + a].push((nv + b, l));
                adj[nv + b].push((nv + a, l));
            }
        }
    }
    let tbase = nv + sources.len();
    Ok((0..sources.len())
        .into_par_iter()
        .map(|s| {
            let dist = dijkstra(&adj, nv + s);
            (0..targets.len()).map(|t| dist[tbase + t]).collect()
        })
        .collect())
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Key(0.0), src)));
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            let nd = d + l;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((Key(nd), w)));
            }
        }
    }
    dist
}

/// Pair correlation of mesh samples under graph geodesics, normalized by
/// the pair distances of `reference` uniform samples drawn with `seed`.
pub fn mesh_pcf(mesh: &TriMesh, samples: &[MeshSample], reference: usize, rmax: f64, bins: usize, seed: u64) -> Result<PcfReport> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::sampler::mix_seed(seed));
    let refs = sample_faces(mesh, &Density::Uniform, reference, &mut rng)?;
    let rd = mesh_geodesic_distances(mesh, &refs, &refs)?;
    let ref_d: Vec<f64> = (0..reference).flat_map(|i| rd[i][i + 1..].to_vec()).collect();
    let d = mesh_geodesic_distances(mesh, samples, samples)?;
    pair_correlation(samples.len(), |i, j| d[i][j], &Reference::Samples(ref_d), rmax, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::icosphere;

    #[test]
    fn antipodal_vertices_of_icosphere() {
        let m = icosphere(3);
        let v = 0;
        let p = m.vertices()[v];
        let far = (0..m.num_vertices())
            .min_by(|&a, &b| linalg::dot(&m.vertices()[a], &p).total_cmp(&linalg::dot(&m.vertices()[b], &p)))
            .unwrap();
        let at = |v: usize| {
            let f = m.vertex_faces(v)[0];
            let k = m.faces()[f].iter().position(|&x| x == v).unwrap();
            let mut b = [0.0; 3];
            b[k] = 1.0;
            MeshSample::new(&m, f, b).unwrap()
        };
        let d = mesh_geodesic_distances(&m, &[at(v)], &[at(far)]).unwrap()[0][0];
        assert!((d / std::f64::consts::PI - 1.0).abs() < 0.08, "{d}");
    }

    #[test]
    fn same_face_and_symmetry() {
        let m = icosphere(1);
        let a = MeshSample::new(&m, 3, [0.6, 0.2, 0.2]).unwrap();
        let b = MeshSample::new(&m, 3, [0.2, 0.2, 0.6]).unwrap();
        let c = MeshSample::new(&m, 17, [0.3, 0.3, 0.4]).unwrap();
        let d = mesh_geodesic_distances(&m, &[a, b, c], &[a, b, c]).unwrap();
        assert!((d[0][1] - linalg::dist(&a.position, &b.position)).abs() < 1e-15);
        for i in 0..3 {
            assert_eq!(d[i][i], 0.0);
            for j in 0..3 {
                assert!((d[i][j] - d[j][i]).abs() < 1e-9);
            }
        }
    }
}
