//! Points on mesh faces and density-weighted face sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::{Error, Result};

/// Point on a mesh given by a face and barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSample {
    pub face: usize,
    pub bary: [f64; 3],
    pub position: [f64; 3],
}

impl MeshSample {
    /// Checks the coordinates and computes the position.
    pub fn new(mesh: &TriMesh, face: usize, bary: [f64; 3]) -> Result<Self> {
        if face >= mesh.num_faces() {
            return Err(Error::Mesh(format!("face {face} out of range")));
        }
        if bary.iter().any(|b| !(*b >= -1e-9)) || (bary.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Mesh(format!("invalid barycentric coordinates {bary:?}")));
        }
        Ok(Self::from_parts(mesh, face, bary))
    }

    /// Clamps negative round-off and renormalizes `bary`.
    pub(crate) fn from_parts(mesh: &TriMesh, face: usize, bary: [f64; 3]) -> Self {
        let mut b = bary.map(|x| x.max(0.0));
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|x| *x /= s);
        Self { face, bary: b, position: mesh.point_at(face, &b) }
    }
}

/// Target density on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    /// One value per vertex; a face uses the mean of its corners.
    PerVertex(Vec<f64>),
    PerFace(Vec<f64>),
}

impl Density {
    /// Unnormalized selection weight of every face.
    pub fn face_weights(&self, mesh: &TriMesh) -> Result<Vec<f64>> {
        let nf = mesh.num_faces();
        let dens: Vec<f64> = match self {
            Density::Uniform => vec![1.0; nf],
            Density::PerVertex(v) => {
                if v.len() != mesh.num_vertices() {
                    return Err(Error::LengthMismatch(v.len(), mesh.num_vertices()));
                }
                mesh.faces().iter().map(|f| f.iter().map(|&i| v[i]).sum::<f64>() / 3.0).collect()
            }
            Density::PerFace(v) => {
                if v.len() != nf {
                    return Err(Error::LengthMismatch(v.len(), nf));
                }
                v.clone()
            }
        };
        if dens.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidConfig("densities must be finite and nonnegative".into()));
        }
        let w: Vec<f64> = dens.iter().enumerate().map(|(f, d)| d * mesh.face_area(f)).collect();
        if !(w.iter().sum::<f64>() > 0.0) {
            return Err(Error::InvalidConfig("total density weight is zero".into()));
        }
        Ok(w)
    }
}

/// `m` i.i.d. points: faces drawn proportionally to area times density, then
/// a uniform point inside the face.
pub fn sample_faces<R: Rng + ?Sized>(mesh: &TriMesh, density: &Density, m: usize, rng: &mut R) -> Result<Vec<MeshSample>> {
    draw(mesh, density, m, rng, false)
}

/// Like [`sample_faces`] but the `k`-th point picks its face from the `k`-th
/// of `m` equal slices of the cumulative face weight (in face order), which
/// spreads the points evenly over well-ordered meshes.
pub fn sample_faces_stratified<R: Rng + ?Sized>(mesh: &TriMesh, density: &Density, m: usize, rng: &mut R) -> Result<Vec<MeshSample>> {
    draw(mesh, density, m, rng, true)
}

fn draw<R: Rng + ?Sized>(mesh: &TriMesh, density: &Density, m: usize, rng: &mut R, strata: bool) -> Result<Vec<MeshSample>> {
    let w = density.face_weights(mesh)?;
    let mut cdf = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for x in &w {
        acc += x;
        cdf.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let r = if strata {
            (k as f64 + rng.random::<f64>()) / m as f64 * total
        } else {
            rng.random::<f64>() * total
        };
        let mut f = cdf.partition_point(|&c| c <= r).min(w.len() - 1);
        while w[f] == 0.0 {
            // r hit a boundary exactly; move to the next face with mass
            f = (f + 1) % w.len();
        }
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let bary = [1.0 - s, s * (1.0 - r2), s * r2];
        out.push(MeshSample::from_parts(mesh, f, bary));
    }
    Ok(out)
}
