//! Hyperbolic discrete Yamabe flow: per-vertex conformal factors whose
//! rescaled edge lengths give every vertex a hyperbolic angle sum of `2 pi`.
//!
//! Lengths are `l'_ij = 2 asinh(exp((u_i + u_j) / 2) l_ij / 2)`, which agrees
//! with `exp((u_i + u_j) / 2) l_ij` for small triangles and makes the angle
//! sums the gradient of a convex energy.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalFactors {
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YamabeOptions {
    /// Target `max_i |Theta_i - 2 pi|`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Total hyperbolic area of the starting metric used for the
    /// Gauss-Bonnet check.
    pub start_area: f64,
}

impl Default for YamabeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, max_halvings: 60, start_area: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YamabeReport {
    pub iterations: usize,
    /// `max_i |Theta_i - 2 pi|` after each iteration (first entry: start).
    pub defect_history: Vec<f64>,
    /// Constant factor of the small-area starting metric.
    pub small_start: f64,
    /// `sum_i (2 pi - Theta_i) - 2 pi chi` at the small-area start.
    pub gauss_bonnet_error: f64,
}

/// `2 asinh(exp((u_i + u_j) / 2) l / 2)` for every edge.
pub fn hyperbolic_lengths(mesh: &TriMesh, u: &[f64]) -> Vec<f64> {
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, &[i, j])| 2.0 * ((0.5 * (u[i] + u[j])).exp() * 0.5 * mesh.edge_length(e)).asinh())
        .collect()
}

/// Interior angles of a hyperbolic triangle, `angles[k]` opposite `sides[k]`;
/// `None` unless the strict triangle inequality holds.
pub fn hyperbolic_angles(sides: [f64; 3]) -> Option<[f64; 3]> {
    let s = 0.5 * (sides[0] + sides[1] + sides[2]);
    let d = sides.map(|x| s - x);
    if d.iter().any(|&x| !(x > 1e-15 * s)) {
        return None;
    }
    // half-angle form, accurate for tiny and large triangles alike
    let sh = d.map(f64::sinh);
    let shs = s.sinh();
    Some(std::array::from_fn(|k| {
        let (p, q) = ((k + 1) % 3, (k + 2) % 3);
        2.0 * (sh[p] * sh[q] / (shs * sh[k])).sqrt().atan()
    }))
}

/// Corner lengths of face `f`: `sides[k]` is opposite corner `k`.
fn face_sides(mesh: &TriMesh, f: usize, len: &[f64]) -> [f64; 3] {
    let fe = mesh.face_edges()[f];
    // edge k joins corners k and k+1, so it is opposite corner k+2
    [len[fe[1]], len[fe[2]], len[fe[0]]]
}

/// Angle sum at every vertex; errors on the first face violating the
/// triangle inequality.
pub fn angle_sums(mesh: &TriMesh, u: &[f64]) -> Result<Vec<f64>> {
    let len = hyperbolic_lengths(mesh, u);
    angle_sums_from_lengths(mesh, &len)
}

pub fn angle_sums_from_lengths(mesh: &TriMesh, len: &[f64]) -> Result<Vec<f64>> {
    let mut theta = vec![0.0; mesh.num_vertices()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let ang = hyperbolic_angles(face_sides(mesh, f, len)).ok_or(Error::TriangleInequality(f))?;
        for k in 0..3 {
            theta[face[k]] += ang[k];
        }
    }
    Ok(theta)
}

/// `max_i |Theta_i(u) - 2 pi|`, recomputed from scratch.
pub fn max_defect(mesh: &TriMesh, u: &[f64]) -> Result<f64> {
    Ok(angle_sums(mesh, u)?.iter().map(|t| (t - TAU).abs()).fold(0.0, f64::max))
}

/// Constant factor whose metric has total hyperbolic area about `area`
/// (small-triangle limit).
pub fn small_area_start(mesh: &TriMesh, area: f64) -> f64 {
    0.5 * (area / mesh.total_area()).ln()
}

/// `sum_i (2 pi - Theta_i(u)) - 2 pi chi`, which equals the total hyperbolic
/// area of the metric.
pub fn gauss_bonnet_residual(mesh: &TriMesh, u: &[f64]) -> Result<f64> {
    let th = angle_sums(mesh, u)?;
    Ok(th.iter().map(|t| TAU - t).sum::<f64>() - TAU * mesh.euler_characteristic() as f64)
}

/// Sparse symmetric matrix with the vertex adjacency pattern.
struct Csr {
    start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn pattern(mesh: &TriMesh) -> Self {
        let mut start = vec![0];
        let mut cols = Vec::new();
        for v in 0..mesh.num_vertices() {
            let mut row: Vec<usize> = mesh.neighbors(v).to_vec();
            row.push(v);
            row.sort_unstable();
            cols.extend(row);
            start.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        Self { start, cols, vals }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &self.cols[self.start[i]..self.start[i + 1]];
        let k = row.binary_search(&j).expect("entry in adjacency pattern");
        self.vals[self.start[i] + k] += v;
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.start[i]..self.start[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.start.len() - 1)
            .map(|i| {
                let row = &self.cols[self.start[i]..self.start[i + 1]];
                self.vals[self.start[i] + row.binary_search(&i).unwrap()]
            })
            .collect()
    }
}

/// Per-face derivatives `d angle_k / d u_corner_j`.
pub fn face_angle_jacobian(sides: [f64; 3]) -> Option<[[f64; 3]; 3]> {
    let ang = hyperbolic_angles(sides)?;
    let t = sides.map(|l| (0.5 * l).tanh());
    // dA[k][m] = d angle_k / d side_m
    let mut da = [[0.0; 3]; 3];
    for k in 0..3 {
        let (p, q) = ((k + 1) % 3, (k + 2) % 3);
        let g = sides[k].sinh() / (sides[p].sinh() * sides[q].sinh() * ang[k].sin());
        da[k][k] = g;
        da[k][p] = -g * ang[q].cos();
        da[k][q] = -g * ang[p].cos();
    }
    // side m joins the two corners other than m
    let mut j = [[0.0; 3]; 3];
    for k in 0..3 {
        for c in 0..3 {
            j[k][c] = (0..3).filter(|&m| m != c).map(|m| da[k][m] * t[m]).sum();
        }
    }
    Some(j)
}

fn assemble_neg_hessian(mesh: &TriMesh, len: &[f64]) -> Result<Csr> {
    let mut a = Csr::pattern(mesh);
    for (f, face) in mesh.faces().iter().enumerate() {
        let j = face_angle_jacobian(face_sides(mesh, f, len)).ok_or(Error::TriangleInequality(f))?;
        for k in 0..3 {
            for c in 0..3 {
                a.add(face[k], face[c], -j[k][c]);
            }
        }
    }
    Ok(a)
}

/// Jacobi-preconditioned conjugate gradients for `a x = b`.
fn conjugate_gradient(a: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let dinv: Vec<f64> = a.diag().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..max_iter {
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= rel_tol * bnorm {
            break;
        }
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Nodes and weights of 5-point Gauss-Legendre on `[0, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_45),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// `E(u + d) - E(u)` for the convex energy with gradient `2 pi - Theta`,
/// `None` if the segment leaves the admissible region.
fn energy_change(mesh: &TriMesh, u: &[f64], d: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    let mut w = vec![0.0; u.len()];
    for (s, wt) in GL5 {
        for i in 0..u.len() {
            w[i] = u[i] + s * d[i];
        }
        let th = angle_sums(mesh, &w).ok()?;
        total += wt * th.iter().zip(d).map(|(t, di)| (TAU - t) * di).sum::<f64>();
    }
    Some(total)
}

fn defect(theta: &[f64]) -> (f64, f64) {
    let max = theta.iter().map(|t| (t - TAU).abs()).fold(0.0, f64::max);
    let l2 = theta.iter().map(|t| (t - TAU) * (t - TAU)).sum::<f64>().sqrt();
    (max, l2)
}

/// Runs the flow from a constant metric with the hyperbolic area of the
/// solution, after checking Gauss-Bonnet on a small-area constant metric.
pub fn yamabe_flow(mesh: &TriMesh, opts: &YamabeOptions) -> Result<(ConformalFactors, YamabeReport)> {
    if mesh.genus() < 2 {
        return Err(Error::UnsupportedGenus(mesh.genus()));
    }
    let nv = mesh.num_vertices();
    let c0 = small_area_start(mesh, opts.start_area);
    let gb = gauss_bonnet_residual(mesh, &vec![c0; nv])? - opts.start_area;
    // the solution has area -2 pi chi; match it with a constant factor first
    let target = -TAU * mesh.euler_characteristic() as f64;
    let area = |c: f64| gauss_bonnet_residual(mesh, &vec![c; nv]).ok();
    let (mut lo, mut hi) = (c0, c0 + 1.0);
    while area(hi).is_some_and(|a| a < target) && hi < 60.0 {
        lo = hi;
        hi += 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match area(mid) {
            Some(a) if a < target => lo = mid,
            _ => hi = mid,
        }
    }
    let (u, mut rep) = yamabe_flow_from(mesh, vec![lo; nv], opts)?;
    rep.small_start = c0;
    rep.gauss_bonnet_error = gb;
    Ok((u, rep))
}

/// Newton iterations with backtracking from `u0`.
pub fn yamabe_flow_from(mesh: &TriMesh, u0: Vec<f64>, opts: &YamabeOptions) -> Result<(ConformalFactors, YamabeReport)> {
    if mesh.genus() < 2 {
        return Err(Error::UnsupportedGenus(mesh.genus()));
    }
    if u0.len() != mesh.num_vertices() {
        return Err(Error::LengthMismatch(u0.len(), mesh.num_vertices()));
    }
    let mut u = u0;
    let mut theta = angle_sums(mesh, &u)?;
    let (mut dmax, mut dl2) = defect(&theta);
    let mut history = vec![dmax];
    let mut it = 0;
    while dmax >= opts.tol {
        if it == opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "Yamabe flow stopped after {it} iterations with defect {dmax:.3e}"
            )));
        }
        it += 1;
        let len = hyperbolic_lengths(mesh, &u);
        let a = assemble_neg_hessian(mesh, &len)?;
        let rhs: Vec<f64> = theta.iter().map(|t| t - TAU).collect();
        let step = conjugate_gradient(&a, &rhs, 1e-13, 20 * mesh.num_vertices().max(50));
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let d: Vec<f64> = step.iter().map(|s| t * s).collect();
            let cand: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + b).collect();
            if let Ok(th) = angle_sums(mesh, &cand) {
                let (m, l2) = defect(&th);
                let decrease = energy_change(mesh, &u, &d).is_some_and(|e| e <= 0.0);
                if l2 < dl2 || decrease {
                    u = cand;
                    theta = th;
                    dmax = m;
                    dl2 = l2;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence(format!(
                "line search failed at iteration {it} with defect {dmax:.3e}; the metric may need edge flips"
            )));
        }
        history.push(dmax);
    }
    let rep = YamabeReport { iterations: it, defect_history: history, small_start: f64::NAN, gauss_bonnet_error: f64::NAN };
    Ok((ConformalFactors { u }, rep))
}

/// Angle of a hyperbolic triangle at the corner between sides `b` and `c`
/// opposite side `a` (used by layouts).
pub fn corner_angle(a: f64, b: f64, c: f64) -> Option<f64> {
    hyperbolic_angles([a, b, c]).map(|x| x[0])
}

/// Sum of interior angles is `pi` minus the area.
pub fn triangle_area(sides: [f64; 3]) -> Option<f64> {
    hyperbolic_angles(sides).map(|a| PI - a.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_angles() {
        // cos A = cosh a / (1 + cosh a) for equilateral triangles
        for a in [1e-6, 0.3, 2.0] {
            let ang = hyperbolic_angles([a, a, a]).unwrap();
            let want = (a.cosh() / (1.0 + a.cosh())).acos();
            assert!((ang[0] - want).abs() < 1e-9, "{a}");
        }
        assert!(hyperbolic_angles([1.0, 1.0, 2.0]).is_none());
        // small triangles are Euclidean
        let ang = hyperbolic_angles([3e-7, 4e-7, 5e-7]).unwrap();
        assert!((ang[2] - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let base = [0.7, 0.9, 1.1];
        let t0 = [0.1, -0.2, 0.05];
        let sides_of = |u: [f64; 3]| {
            // corner c sits opposite side c; side k joins the other corners
            std::array::from_fn(|k| {
                let (p, q) = ((k + 1) % 3, (k + 2) % 3);
                2.0 * ((0.5 * (u[p] + u[q])).exp() * (base[k] * 0.5f64).sinh()).asinh()
            })
        };
        let j = face_angle_jacobian(sides_of(t0)).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut up = t0;
            let mut dn = t0;
            up[c] += h;
            dn[c] -= h;
            let ap = hyperbolic_angles(sides_of(up)).unwrap();
            let an = hyperbolic_angles(sides_of(dn)).unwrap();
            for k in 0..3 {
                let fd = (ap[k] - an[k]) / (2.0 * h);
                assert!((fd - j[k][c]).abs() < 1e-7, "k={k} c={c}: {fd} vs {}", j[k][c]);
            }
        }
        // symmetric across corners
        for k in 0..3 {
            for c in 0..3 {
                assert!((j[k][c] - j[c][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_low_genus() {
        let s = crate::mesh::generate::icosphere(1);
        assert_eq!(yamabe_flow(&s, &YamabeOptions::default()), Err(Error::UnsupportedGenus(0)));
    }
}
