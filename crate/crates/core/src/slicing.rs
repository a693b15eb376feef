//! Random geodesic slices through the model origin, projections onto them,
//! and the 1D coordinate of a projected point along its slice.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::manifold::{HyperPoint, SpherePoint};

/// Projections with a smaller in-plane norm are rejected.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

/// Great circle `span{e1, e2} ∩ S^d` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSlice {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

/// Geodesic of `H^d` spanned by the origin and a unit spatial direction.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperSlice {
    /// Unit vector with a zero time coordinate.
    pub dvec: Vec<f64>,
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform random great circle of `S^d`: two Gaussian vectors of `R^{d+1}`
/// orthonormalized by Gram-Schmidt.
pub fn sample_slice_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> SphereSlice {
    assert!(d >= 1, "sphere dimension must be at least 1");
    loop {
        let mut e1 = gaussian_vec(rng, d + 1);
        let mut e2 = gaussian_vec(rng, d + 1);
        if linalg::normalize(&mut e1) < 1e-9 {
            continue;
        }
        let c = dot(&e1, &e2);
        linalg::axpy(-c, &e1, &mut e2);
        if linalg::normalize(&mut e2) < 1e-9 {
            continue;
        }
        return SphereSlice { e1, e2 };
    }
}

/// Uniform random geodesic through the origin of `H^d`.
pub fn sample_slice_hyper<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HyperSlice {
    assert!(d >= 1, "hyperbolic dimension must be at least 1");
    loop {
        let mut v = gaussian_vec(rng, d);
        if linalg::normalize(&mut v) < 1e-9 {
            continue;
        }
        v.push(0.0);
        return HyperSlice { dvec: v };
    }
}

impl SphereSlice {
    /// In-plane coordinates `(<x, e1>, <x, e2>)`.
    #[inline]
    pub fn plane_coords(&self, x: &[f64]) -> (f64, f64) {
        (dot(x, &self.e1), dot(x, &self.e2))
    }

    /// Writes the normalized projection of `x` onto the great circle.
    #[inline]
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (a, b) = self.plane_coords(x);
        let r = a.hypot(b);
        if r < ORTHOGONAL_TOL {
            return Err(Error::OrthogonalToSlice);
        }
        let (a, b) = (a / r, b / r);
        for ((o, u), v) in out.iter_mut().zip(&self.e1).zip(&self.e2) {
            *o = a * u + b * v;
        }
        Ok(())
    }

    /// Point of the great circle at periodic coordinate `t` (inverse of
    /// [`coord_sphere`]).
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let ang = 2.0 * PI * t - PI;
        let (s, c) = ang.sin_cos();
        self.e1.iter().zip(&self.e2).map(|(u, v)| c * u + s * v).collect()
    }
}

/// `t = (pi + atan2(b, a)) / 2pi` from in-plane coordinates, wrapped to `[0, 1)`.
#[inline]
pub fn circle_coord(a: f64, b: f64) -> f64 {
    let t = (PI + b.atan2(a)) / (2.0 * PI);
    if t >= 1.0 {
        t - 1.0
    } else {
        t
    }
}

pub fn project_sphere(s: &SphereSlice, x: &SpherePoint) -> Result<SpherePoint> {
    let mut out = vec![0.0; x.coords().len()];
    s.project_into(x.coords(), &mut out)?;
    Ok(SpherePoint::from_raw(out))
}

/// Periodic coordinate in `[0, 1)` of a point on the slice.
pub fn coord_sphere(s: &SphereSlice, p: &SpherePoint) -> f64 {
    let (a, b) = s.plane_coords(p.coords());
    circle_coord(a, b)
}

impl HyperSlice {
    /// `<x, d>` (Euclidean; `d` has no time component).
    #[inline]
    pub fn along(&self, x: &[f64]) -> f64 {
        dot(x, &self.dvec)
    }

    /// Writes `Pi(x) / sqrt(-<Pi(x), Pi(x)>_L)` where `Pi` projects onto
    /// `span{d, x_O}`.
    #[inline]
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len() - 1;
        let a = self.along(x);
        let t = x[n];
        let s = (t * t - a * a).sqrt();
        for (o, di) in out.iter_mut().zip(&self.dvec) {
            *o = a / s * di;
        }
        out[n] = t / s;
    }

    /// Signed geodesic coordinate of the projection of `x`, computed without
    /// forming the projected point.
    #[inline]
    pub fn coord_of(&self, x: &[f64]) -> f64 {
        let n = x.len() - 1;
        (self.along(x) / x[n]).atanh()
    }

    /// Point of the geodesic at signed distance `t` from the origin.
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let mut p: Vec<f64> = self.dvec.iter().map(|d| d * t.sinh()).collect();
        let n = p.len() - 1;
        p[n] = t.cosh();
        p
    }
}

pub fn project_hyper(s: &HyperSlice, x: &HyperPoint) -> HyperPoint {
    let mut out = vec![0.0; x.coords().len()];
    s.project_into(x.coords(), &mut out);
    HyperPoint::from_raw(out)
}

/// Signed distance from the origin along the slice direction.
pub fn coord_hyper(s: &HyperSlice, p: &HyperPoint) -> f64 {
    s.along(p.coords()).asinh()
}
