//! Hyperbolic space `H^d` in the Lorentz model.

use super::{check_same_dim, lorentz_dot_raw, HyperPoint, TangentVec, ZERO_TANGENT};
use crate::error::Result;
use crate::linalg;

/// Geodesic distance `arccosh(-<x, y>_L)`.
pub fn dist(x: &HyperPoint, y: &HyperPoint) -> f64 {
    dist_raw(x.coords(), y.coords())
}

/// Computed as `2 asinh(|y - x|_L / 2)`, the same quantity as the clamped
/// `arccosh(-<x, y>_L)` without its cancellation for nearby points.
#[inline]
pub fn dist_raw(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() - 1;
    let mut s = 0.0;
    for i in 0..n {
        s += (x[i] - y[i]) * (x[i] - y[i]);
    }
    let dt = x[n] - y[n];
    let chord2 = (s - dt * dt).max(0.0);
    2.0 * (0.5 * chord2.sqrt()).asinh()
}

/// Rescales an ambient vector with negative Lorentz norm onto the upper sheet.
#[inline]
pub fn renormalize(p: &mut [f64]) {
    let q = -lorentz_dot_raw(p, p);
    if q > 0.0 {
        let s = q.sqrt();
        let n = p.len() - 1;
        let sign = if p[n] < 0.0 { -1.0 } else { 1.0 };
        linalg::scale(p, sign / s);
    }
}

pub fn exp(x: &HyperPoint, v: &TangentVec) -> Result<HyperPoint> {
    check_same_dim(x.coords(), v.as_slice())?;
    let mut out = vec![0.0; x.coords().len()];
    exp_into(x.coords(), v.as_slice(), &mut out);
    Ok(HyperPoint::from_raw(out))
}

/// `cosh(|v|_L) x + sinh(|v|_L) v / |v|_L`.
#[inline]
pub fn exp_into(x: &[f64], v: &[f64], out: &mut [f64]) {
    let nv = lorentz_dot_raw(v, v).max(0.0).sqrt();
    if nv < ZERO_TANGENT {
        out.copy_from_slice(x);
        return;
    }
    let c = nv.cosh();
    let k = nv.sinh() / nv;
    for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
        *o = c * xi + k * vi;
    }
    renormalize(out);
}

pub fn log(x: &HyperPoint, y: &HyperPoint) -> Result<TangentVec> {
    check_same_dim(x.coords(), y.coords())?;
    let mut out = vec![0.0; x.coords().len()];
    log_into(x.coords(), y.coords(), &mut out);
    Ok(TangentVec(out))
}

/// `arccosh(-<x,y>_L) / sqrt(<x,y>_L^2 - 1) * (y + <x,y>_L x)`; zero when the
/// points coincide.
#[inline]
pub fn log_into(x: &[f64], y: &[f64], out: &mut [f64]) {
    let a = lorentz_dot_raw(x, y);
    let r = dist_raw(x, y);
    // sinh(r) = sqrt(a^2 - 1), evaluated through r for accuracy
    let sh = r.sinh();
    if sh * sh < 1e-18 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let k = r / sh;
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = k * (yi + a * xi);
    }
}

/// Projects an ambient vector onto the tangent space at `x`.
pub fn project_tangent(x: &[f64], v: &mut [f64]) {
    let c = lorentz_dot_raw(x, v);
    linalg::axpy(c, x, v);
}

/// Result of applying a hyperbolic slice rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotated {
    pub point: HyperPoint,
    /// The direction `y - x` had no component orthogonal to the origin.
    pub degenerate: bool,
}

/// Applies the Lorentz boost along the slice through the origin that carries
/// `x` to `y`, fixing the complement of `span{x_O, d}` where `d` is the
/// normalized spatial part of `y - x`. Both points are expected to lie on a
/// common geodesic through the origin.
pub fn rotate_along_slice(x: &HyperPoint, y: &HyperPoint, w: &HyperPoint) -> Result<Rotated> {
    check_same_dim(x.coords(), y.coords())?;
    check_same_dim(x.coords(), w.coords())?;
    let mut out = vec![0.0; x.coords().len()];
    let ok = rotate_into(x.coords(), y.coords(), w.coords(), &mut out);
    Ok(Rotated {
        point: HyperPoint::from_raw(out),
        degenerate: !ok,
    })
}

/// Slice-kernel form of [`rotate_along_slice`]. Writes `w` unchanged and
/// returns `false` on a degenerate direction.
pub fn rotate_into(x: &[f64], y: &[f64], w: &[f64], out: &mut [f64]) -> bool {
    let n = x.len() - 1;
    let mut dn = 0.0;
    for i in 0..n {
        dn += (y[i] - x[i]) * (y[i] - x[i]);
    }
    let dn = dn.sqrt();
    if dn < 1e-14 {
        out.copy_from_slice(w);
        return false;
    }
    let phi = dist_raw(x, y);
    let (ch, sh) = (phi.cosh(), phi.sinh());
    let mut wd = 0.0;
    for i in 0..n {
        wd += w[i] * (y[i] - x[i]) / dn;
    }
    let w0 = w[n];
    let nd = ch * wd + sh * w0 - wd;
    for i in 0..n {
        out[i] = w[i] + nd * (y[i] - x[i]) / dn;
    }
    out[n] = sh * wd + ch * w0;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::lorentz_dot;

    #[test]
    fn distance_along_axis() {
        let o = HyperPoint::origin(2);
        let t = 1.5f64;
        let p = HyperPoint::new(vec![t.sinh(), 0.0, t.cosh()]).unwrap();
        assert_eq!(dist(&o, &o), 0.0);
        assert!((dist(&o, &p) - t).abs() < 1e-14);
    }

    #[test]
    fn exp_log_axis() {
        let o = HyperPoint::origin(2);
        assert_eq!(exp(&o, &TangentVec::zeros(3)).unwrap(), o);
        let e = exp(&o, &TangentVec(vec![1.0, 0.0, 0.0])).unwrap();
        let want = [1f64.sinh(), 0.0, 1f64.cosh()];
        assert!(linalg::dist(e.coords(), &want) < 1e-14);
        let v = log(&o, &HyperPoint::new(want.to_vec()).unwrap()).unwrap();
        assert!(linalg::dist(&v.0, &[1.0, 0.0, 0.0]) < 1e-14);
        assert_eq!(log(&o, &o).unwrap(), TangentVec::zeros(3));
    }

    #[test]
    fn boost_moves_x_to_y() {
        let d = [0.6, 0.8, 0.0];
        let at = |t: f64| HyperPoint::new(vec![d[0] * t.sinh(), d[1] * t.sinh(), t.cosh()]).unwrap();
        let (x, y) = (at(-0.4), at(1.3));
        let r = rotate_along_slice(&x, &y, &x).unwrap();
        assert!(!r.degenerate);
        assert!(linalg::dist(r.point.coords(), y.coords()) < 1e-12);
        // orthogonal to both d and x_O: untouched
        let w = [0.8, -0.6, 0.0];
        let mut out = [0.0; 3];
        assert!(rotate_into(x.coords(), y.coords(), &w, &mut out));
        assert!(linalg::dist(&out, &w) < 1e-15);
        let w = HyperPoint::from_spatial(&[0.8, -0.6]);
        assert!((lorentz_dot(w.coords(), w.coords()).unwrap() + 1.0).abs() < 1e-12);
        let r = rotate_along_slice(&x, &x, &w).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.point, w);
    }
}
