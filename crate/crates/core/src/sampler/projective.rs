//! Objects represented as points of `P^d`: affine lines of the plane and
//! rotations given by unit quaternions.

use crate::error::{Error, Result};
use crate::sampler::{DiscreteMeasure, Space};

/// Affine lines `a x + b y + c = 0` as unit coefficient triples in `P^2`.
pub fn make_affine_line_measure(lines: &[[f64; 3]]) -> Result<DiscreteMeasure> {
    if lines.is_empty() {
        return Err(Error::Empty("lines"));
    }
    let mut data = Vec::with_capacity(3 * lines.len());
    for l in lines {
        let ab = l[0].hypot(l[1]);
        if !(ab > 1e-12 * l[2].abs().max(1.0)) || !l[2].is_finite() {
            return Err(Error::InvalidConfig(format!(
                "degenerate line ({}, {}, {})",
                l[0], l[1], l[2]
            )));
        }
        let s = (ab * ab + l[2] * l[2]).sqrt();
        data.extend(l.iter().map(|v| v / s));
    }
    Ok(DiscreteMeasure::from_flat_raw(Space::Projective, 3, data))
}

/// Line coefficients of a point of `P^2`, scaled so that `(a, b)` is a unit
/// normal; the sign follows the atom.
pub fn affine_line_from_atom(x: &[f64]) -> Result<[f64; 3]> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.len() });
    }
    let ab = x[0].hypot(x[1]);
    if ab < 1e-12 {
        return Err(Error::InvalidConfig("atom is the line at infinity".into()));
    }
    Ok([x[0] / ab, x[1] / ab, x[2] / ab])
}

/// Signed distance from `(px, py)` to the line `a x + b y + c = 0`.
pub fn line_signed_distance(l: &[f64; 3], px: f64, py: f64) -> f64 {
    (l[0] * px + l[1] * py + l[2]) / l[0].hypot(l[1])
}

/// Flips `x` so that its first coordinate above `1e-12` in magnitude is
/// positive.
pub fn canonical_sign(x: &mut [f64]) {
    if let Some(v) = x.iter().find(|v| v.abs() > 1e-12) {
        if *v < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Hamilton product of quaternions stored as `(w, x, y, z)`.
pub fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// `q^{-1} (0, v) q` for a unit quaternion `q = (w, x, y, z)`.
pub fn quat_rotate(q: &[f64; 4], v: &[f64; 3]) -> [f64; 3] {
    let qi = [q[0], -q[1], -q[2], -q[3]];
    let r = quat_mul(&quat_mul(&qi, &[0.0, v[0], v[1], v[2]]), q);
    [r[1], r[2], r[3]]
}

/// Row-major matrix of [`quat_rotate`]; identical for `q` and `-q`.
pub fn quaternion_to_matrix(q: &[f64; 4]) -> [[f64; 3]; 3] {
    let [w, x, y, z] = *q;
    // transpose of the usual q v q^{-1} matrix
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + w * z), 2.0 * (x * z - w * y)],
        [2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + w * x)],
        [2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_examples() {
        let m = make_affine_line_measure(&[[1.0, 0.0, 0.0], [2.0, 0.0, -2.0]]).unwrap();
        assert_eq!(m.atom(0), &[1.0, 0.0, 0.0]);
        let s = 0.5f64.sqrt();
        assert!((m.atom(1)[0] - s).abs() < 1e-15 && (m.atom(1)[2] + s).abs() < 1e-15);
        let l = affine_line_from_atom(m.atom(1)).unwrap();
        assert!((line_signed_distance(&l, 1.0, 5.0)).abs() < 1e-15);
        assert!(make_affine_line_measure(&[[0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn quaternion_matrix_matches_action() {
        let mut q = [0.3, -0.5, 0.7, 0.2];
        let s = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        q.iter_mut().for_each(|v| *v /= s);
        let r = quaternion_to_matrix(&q);
        let v = [0.2, -1.0, 0.4];
        let a = quat_rotate(&q, &v);
        let neg = [-q[0], -q[1], -q[2], -q[3]];
        let b = quat_rotate(&neg, &v);
        for i in 0..3 {
            let mv: f64 = (0..3).map(|k| r[i][k] * v[k]).sum();
            assert!((mv - a[i]).abs() < 1e-14);
            assert!((a[i] - b[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn sign_canonicalization() {
        let mut x = [0.0, -0.6, 0.8];
        canonical_sign(&mut x);
        assert_eq!(x, [0.0, 0.6, -0.8]);
    }
}
