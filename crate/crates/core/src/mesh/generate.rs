//! Procedural test meshes.

use std::collections::HashMap;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::linalg;

/// Icosahedron subdivided `level` times, vertices on the unit sphere.
pub fn icosphere(level: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
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
    ];
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
    for v in verts.iter_mut() {
        linalg::normalize(v);
    }
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let mut m: [f64; 3] = std::array::from_fn(|i| verts[a][i] + verts[b][i]);
                linalg::normalize(&mut m);
                verts.push(m);
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere is a valid closed mesh")
}

/// Icosphere scaled by `(a, b, c)` along the axes.
pub fn ellipsoid(level: usize, a: f64, b: f64, c: f64) -> TriMesh {
    let s = icosphere(level);
    let v = s.vertices().iter().map(|p| [a * p[0], b * p[1], c * p[2]]).collect();
    s.with_vertices(v).expect("same vertex count")
}

/// Torus of revolution about the z axis with an `nu x nv` grid.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriMesh> {
    if nu < 3 || nv < 3 {
        return Err(Error::InvalidConfig("torus grid needs at least 3 x 3 cells".into()));
    }
    let tau = std::f64::consts::TAU;
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let (su, cu) = (tau * i as f64 / nu as f64).sin_cos();
        for j in 0..nv {
            let (sv, cv) = (tau * j as f64 / nv as f64).sin_cos();
            let r = major + minor * cv;
            verts.push([r * cu, r * su, minor * sv]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces)
}

/// Boundary of a solid made of unit voxels, each square split in two
/// triangles, oriented outward. The solid must not touch itself along
/// voxel edges or corners only.
pub fn voxel_surface(filled: &dyn Fn(i64, i64, i64) -> bool, dims: [i64; 3]) -> Result<TriMesh> {
    let inside = |p: [i64; 3]| {
        (0..3).all(|a| p[a] >= 0 && p[a] < dims[a]) && filled(p[0], p[1], p[2])
    };
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    let mut vid = |p: [i64; 3], verts: &mut Vec<[f64; 3]>| {
        *index.entry(p).or_insert_with(|| {
            verts.push(p.map(|x| x as f64));
            verts.len() - 1
        })
    };
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                let p = [x, y, z];
                if !inside(p) {
                    continue;
                }
                for a in 0..3 {
                    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                    for dir in [1i64, -1] {
                        let mut q = p;
                        q[a] += dir;
                        if inside(q) {
                            continue;
                        }
                        let mut base = p;
                        if dir == 1 {
                            base[a] += 1;
                        }
                        let corner = |db: i64, dc: i64| {
                            let mut r = base;
                            r[b] += db;
                            r[c] += dc;
                            r
                        };
                        let mut quad = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                        if dir == -1 {
                            quad.reverse();
                        }
                        let ids = quad.map(|r| vid(r, &mut verts));
                        faces.push([ids[0], ids[1], ids[2]]);
                        faces.push([ids[0], ids[2], ids[3]]);
                    }
                }
            }
        }
    }
    TriMesh::new(verts, faces)
}

/// Slab with `holes` square tunnels (genus = `holes`), `scale` voxels per
/// unit feature, smoothed with `smooth_iters` Taubin steps and rescaled to
/// unit diameter order.
pub fn holed_slab(holes: usize, scale: usize, smooth_iters: usize) -> Result<TriMesh> {
    if holes == 0 || scale == 0 {
        return Err(Error::InvalidConfig("need at least one hole and a positive scale".into()));
    }
    let s = scale as i64;
    let h = holes as i64;
    let dims = [(3 * h + 1) * s, 3 * s, s];
    let filled = move |x: i64, y: i64, _z: i64| {
        let in_hole_y = y >= s && y < 2 * s;
        let in_hole_x = (0..h).any(|k| x >= (3 * k + 1) * s && x < (3 * k + 3) * s);
        !(in_hole_x && in_hole_y)
    };
    let m = voxel_surface(&filled, dims)?;
    let m = taubin_smooth(&m, smooth_iters, 0.5, -0.53)?;
    let k = 1.0 / s as f64;
    let c = m.centroid();
    let v = m.vertices().iter().map(|p| std::array::from_fn(|i| (p[i] - c[i]) * k)).collect();
    m.with_vertices(v)
}

/// Alternating shrink (`lambda > 0`) and inflate (`mu < 0`) umbrella steps.
pub fn taubin_smooth(mesh: &TriMesh, iters: usize, lambda: f64, mu: f64) -> Result<TriMesh> {
    let mut v = mesh.vertices().to_vec();
    for _ in 0..iters {
        for w in [lambda, mu] {
            let prev = v.clone();
            for (i, p) in v.iter_mut().enumerate() {
                let nb = mesh.neighbors(i);
                let mut avg = [0.0; 3];
                for &j in nb {
                    for k in 0..3 {
                        avg[k] += prev[j][k] / nb.len() as f64;
                    }
                }
                for k in 0..3 {
                    p[k] = prev[i][k] + w * (avg[k] - prev[i][k]);
                }
            }
        }
    }
    mesh.with_vertices(v)
}
