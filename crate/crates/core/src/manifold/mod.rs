//! Closed-form Riemannian geometry of the unit sphere `S^d` and of the
//! hyperbolic space `H^d` in the Lorentz (hyperboloid) model.
//!
//! Points are stored as ambient coordinates in `R^{d+1}`. For `H^d` the last
//! coordinate is the "time" axis and the model origin is `(0, ..., 0, 1)`.
//!
//! Each geometry exposes two layers: typed functions over [`SpherePoint`] /
//! [`HyperPoint`] that validate their inputs, and `*_into` slice kernels used
//! by the samplers' inner loops.

pub mod hyperbolic;
pub mod sphere;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on the manifold constraint accepted by the checked constructors.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Norm below which a tangent vector is treated as zero by `Exp`.
pub const ZERO_TANGENT: f64 = 1e-14;

/// Lorentzian bilinear form `sum_{i<=d} x_i y_i - x_{d+1} y_{d+1}`.
pub fn lorentz_dot(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.len(),
        });
    }
    Ok(lorentz_dot_raw(x, y))
}

#[inline]
pub(crate) fn lorentz_dot_raw(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() - 1;
    linalg::dot(&x[..n], &y[..n]) - x[n] * y[n]
}

/// A unit vector of `R^{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        let r = (linalg::norm(&coords) - 1.0).abs();
        if !(r <= ON_MANIFOLD_TOL) {
            return Err(Error::OffManifold(r));
        }
        Ok(Self(coords))
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn from_ambient(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        let n = linalg::normalize(&mut coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::OffManifold(f64::NAN));
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Intrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn antipode(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

/// A point on the upper sheet of the hyperboloid `<x, x>_L = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint(Vec<f64>);

impl HyperPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        let r = (lorentz_dot_raw(&coords, &coords) + 1.0).abs();
        let t = coords[coords.len() - 1];
        // relative tolerance: coordinates grow like cosh(distance to origin)
        let tol = ON_MANIFOLD_TOL * t.abs().max(1.0).powi(2);
        if !(r <= tol) || t < 1.0 - ON_MANIFOLD_TOL {
            return Err(Error::OffManifold(r));
        }
        Ok(Self(coords))
    }

    /// The model origin `x_O = (0, ..., 0, 1)` of `H^d`.
    pub fn origin(d: usize) -> Self {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        Self(c)
    }

    /// Lifts spatial coordinates `(x_1..x_d)` onto the hyperboloid.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let mut c = spatial.to_vec();
        c.push((1.0 + linalg::dot(spatial, spatial)).sqrt());
        Self(c)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Time (last) coordinate; equals `cosh` of the distance to the origin.
    pub fn time(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

/// A tangent vector expressed in ambient coordinates. The base point is
/// passed alongside wherever it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec(pub Vec<f64>);

impl TangentVec {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    pub fn is_tangent_to_sphere(&self, base: &SpherePoint, tol: f64) -> bool {
        linalg::dot(&self.0, base.coords()).abs() <= tol
    }

    pub fn is_tangent_to_hyper(&self, base: &HyperPoint, tol: f64) -> bool {
        lorentz_dot_raw(&self.0, base.coords()).abs() <= tol
    }
}

fn check_same_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}
