//! Uniformly weighted point sets on a model space.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{lorentz_dot_raw, HyperPoint, SpherePoint};

/// Model space of a measure. `Projective` atoms are unit vectors read up to sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Sphere,
    Hyperbolic,
    Projective,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Sphere => "sphere",
            Space::Hyperbolic => "hyperbolic",
            Space::Projective => "projective",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Space::Sphere),
            "hyperbolic" => Ok(Space::Hyperbolic),
            "projective" => Ok(Space::Projective),
            other => Err(Error::Parse(format!("unknown space tag `{other}`"))),
        }
    }

    fn is_spherical(self) -> bool {
        !matches!(self, Space::Hyperbolic)
    }
}

/// Ordered atoms with equal weights, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    space: Space,
    dim: usize,
    data: Vec<f64>,
}

fn manifold_defect(space: Space, x: &[f64]) -> f64 {
    if space.is_spherical() {
        (linalg::norm(x) - 1.0).abs()
    } else {
        let t = x[x.len() - 1];
        if t < 1.0 - 1e-9 {
            return f64::INFINITY;
        }
        (lorentz_dot_raw(x, x) + 1.0).abs() / t.max(1.0).powi(2)
    }
}

fn renormalize(space: Space, x: &mut [f64]) {
    if space.is_spherical() {
        linalg::normalize(x);
    } else {
        crate::manifold::hyperbolic::renormalize(x);
    }
}

impl DiscreteMeasure {
    /// Checks every atom against the manifold within `tol` and snaps it exactly
    /// onto the manifold.
    pub fn from_rows(space: Space, rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty("measure"))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend(r);
        }
        Self::from_flat(space, dim, data, tol)
    }

    pub fn from_flat(space: Space, dim: usize, mut data: Vec<f64>, tol: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidConfig(format!("ambient dimension {dim} < 2")));
        }
        if data.is_empty() {
            return Err(Error::Empty("measure"));
        }
        if data.len() % dim != 0 {
            return Err(Error::LengthMismatch(data.len(), dim));
        }
        for x in data.chunks_exact_mut(dim) {
            let e = manifold_defect(space, x);
            if !(e <= tol) {
                return Err(Error::OffManifold(e));
            }
            renormalize(space, x);
        }
        Ok(Self { space, dim, data })
    }

    /// Trusted constructor for atoms already on the manifold.
    pub(crate) fn from_flat_raw(space: Space, dim: usize, data: Vec<f64>) -> Self {
        debug_assert!(!data.is_empty() && data.len() % dim == 0);
        Self { space, dim, data }
    }

    pub fn from_sphere_points(points: &[SpherePoint]) -> Result<Self> {
        let rows = points.iter().map(|p| p.coords().to_vec()).collect();
        Self::from_rows(Space::Sphere, rows, f64::INFINITY)
    }

    pub fn from_hyper_points(points: &[HyperPoint]) -> Result<Self> {
        let rows = points.iter().map(|p| p.coords().to_vec()).collect();
        Self::from_rows(Space::Hyperbolic, rows, f64::INFINITY)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Same atoms under another tag; spherical and projective are interchangeable.
    pub fn with_space(mut self, space: Space) -> Result<Self> {
        if space.is_spherical() != self.space.is_spherical() {
            return Err(Error::InvalidConfig(format!(
                "cannot retag {} atoms as {}",
                self.space.name(),
                space.name()
            )));
        }
        self.space = space;
        Ok(self)
    }

    /// Length `d + 1` of each atom.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Intrinsic dimension `d`.
    pub fn manifold_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Atoms at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::Empty("selection"));
        }
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.atom(i));
        }
        Ok(Self::from_flat_raw(self.space, self.dim, data))
    }

    /// Appends the antipode of every atom (spherical spaces only).
    pub fn symmetrized(&self) -> Result<Self> {
        if !self.space.is_spherical() {
            return Err(Error::InvalidConfig("antipodes need a spherical measure".into()));
        }
        let mut data = self.data.clone();
        data.extend(self.data.iter().map(|v| -v));
        Ok(Self::from_flat_raw(self.space, self.dim, data))
    }

    /// Applies the row-major `(d+1) x (d+1)` matrix `r` to every atom.
    pub fn transformed(&self, r: &[f64]) -> Result<Self> {
        let n = self.dim;
        if r.len() != n * n {
            return Err(Error::LengthMismatch(r.len(), n * n));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for x in self.iter() {
            data.extend(mat_vec(r, x));
        }
        Self::from_flat(self.space, n, data, 1e-9)
    }
}

pub(crate) fn mat_vec(r: &[f64], x: &[f64]) -> Vec<f64> {
    r.chunks_exact(x.len()).map(|row| linalg::dot(row, x)).collect()
}

/// Draws `k` atoms of `nu` uniformly without replacement.
pub fn subsample<R: Rng + ?Sized>(nu: &DiscreteMeasure, k: usize, rng: &mut R) -> Result<DiscreteMeasure> {
    if k == 0 {
        return Err(Error::Empty("subsample"));
    }
    if k > nu.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot draw {k} atoms from a measure of {}",
            nu.len()
        )));
    }
    let idx = rand::seq::index::sample(rng, nu.len(), k).into_vec();
    nu.select(&idx)
}
