//! Unit sphere `S^d` embedded in `R^{d+1}`.

use super::{check_same_dim, SpherePoint, TangentVec, ZERO_TANGENT};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};

/// Below this tangential norm two points are treated as colinear.
const COLINEAR: f64 = 1e-14;

/// Great-circle distance in radians, in `[0, pi]`.
pub fn dist(x: &SpherePoint, y: &SpherePoint) -> f64 {
    dist_raw(x.coords(), y.coords())
}

/// Angle between two unit vectors. Uses the half-chord form, which agrees
/// with `acos(clamp(<x, y>))` but stays accurate near 0 and pi.
#[inline]
pub fn dist_raw(x: &[f64], y: &[f64]) -> f64 {
    let mut dm = 0.0;
    let mut dp = 0.0;
    for (a, b) in x.iter().zip(y) {
        dm += (a - b) * (a - b);
        dp += (a + b) * (a + b);
    }
    2.0 * dm.sqrt().atan2(dp.sqrt())
}

pub fn exp(x: &SpherePoint, v: &TangentVec) -> Result<SpherePoint> {
    check_same_dim(x.coords(), v.as_slice())?;
    let mut out = vec![0.0; x.coords().len()];
    exp_into(x.coords(), v.as_slice(), &mut out);
    Ok(SpherePoint::from_raw(out))
}

/// `cos(|v|) x + sin(|v|) v / |v|`, renormalized onto the sphere.
#[inline]
pub fn exp_into(x: &[f64], v: &[f64], out: &mut [f64]) {
    let nv = norm(v);
    if nv < ZERO_TANGENT {
        out.copy_from_slice(x);
        return;
    }
    let (s, c) = nv.sin_cos();
    let k = s / nv;
    for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
        *o = c * xi + k * vi;
    }
    linalg::normalize(out);
}

pub fn log(x: &SpherePoint, y: &SpherePoint) -> Result<TangentVec> {
    check_same_dim(x.coords(), y.coords())?;
    let mut out = vec![0.0; x.coords().len()];
    log_into(x.coords(), y.coords(), &mut out)?;
    Ok(TangentVec(out))
}

/// Tangent vector at `x` pointing to `y` with length `dist(x, y)`.
#[inline]
pub fn log_into(x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
    let c = dot(x, y);
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = yi - c * xi;
    }
    let nt = norm(out);
    if nt < COLINEAR {
        if c < 0.0 {
            return Err(Error::AntipodalLog);
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        return Ok(());
    }
    let d = dist_raw(x, y);
    linalg::scale(out, d / nt);
    Ok(())
}

/// Projects an ambient vector onto the tangent space at `x`.
pub fn project_tangent(x: &[f64], v: &mut [f64]) {
    let c = dot(x, v);
    linalg::axpy(-c, x, v);
}

/// Result of applying a slice rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotated {
    pub point: SpherePoint,
    /// `x` and `y` were colinear; the identity was applied.
    pub degenerate: bool,
}

/// Applies the rotation of `S^d` that moves `x` to `y` along their great
/// circle and fixes the orthogonal complement of `span{x, y}`, to `w`.
pub fn rotate_along_slice(x: &SpherePoint, y: &SpherePoint, w: &SpherePoint) -> Result<Rotated> {
    check_same_dim(x.coords(), y.coords())?;
    check_same_dim(x.coords(), w.coords())?;
    let mut out = vec![0.0; x.coords().len()];
    let ok = rotate_into(x.coords(), y.coords(), w.coords(), &mut out);
    Ok(Rotated {
        point: SpherePoint::from_raw(out),
        degenerate: !ok,
    })
}

/// Slice-kernel form of [`rotate_along_slice`]. Writes `w` unchanged and
/// returns `false` when `x = +-y`.
pub fn rotate_into(x: &[f64], y: &[f64], w: &[f64], out: &mut [f64]) -> bool {
    let n = x.len();
    let cxy = dot(x, y);
    // Gram-Schmidt: unit vector in span{x, y} orthogonal to x
    let mut yt = [0.0f64; 16];
    let mut yt_heap;
    let yt: &mut [f64] = if n <= 16 {
        &mut yt[..n]
    } else {
        yt_heap = vec![0.0; n];
        &mut yt_heap
    };
    for ((t, xi), yi) in yt.iter_mut().zip(x).zip(y) {
        *t = yi - cxy * xi;
    }
    let nt = linalg::normalize(yt);
    if nt < COLINEAR {
        out.copy_from_slice(w);
        return false;
    }
    let phi = dist_raw(x, y);
    let (s, c) = phi.sin_cos();
    let wx = dot(w, x);
    let wy = dot(w, yt);
    let ax = c * wx - s * wy - wx;
    let ay = s * wx + c * wy - wy;
    for i in 0..n {
        out[i] = w[i] + ax * x[i] + ay * yt[i];
    }
    true
}
