//! Built-in target measures.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampler::{DiscreteMeasure, Space};

fn unit_gaussian<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if linalg::normalize(&mut v) > 1e-12 {
            return v;
        }
    }
}

/// `m` independent uniform points of `S^d`.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 || d == 0 {
        return Err(Error::Empty("target"));
    }
    let data: Vec<f64> = (0..m).flat_map(|_| unit_gaussian(rng, d + 1)).collect();
    Ok(DiscreteMeasure::from_flat_raw(Space::Sphere, d + 1, data))
}

/// `m` jittered points of `S^2`, one uniform point in each cell of an
/// equal-area partition into latitude bands of near-square cells. Every atom
/// is marginally uniform and the set has no low-frequency clumping.
pub fn stratified_sphere2<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(Error::Empty("target"));
    }
    // cells of area 4pi/m have side ~ sqrt(4pi/m); bands span pi in latitude
    let rows = ((m as f64 * std::f64::consts::PI / 4.0).sqrt().round() as usize).clamp(1, m);
    let mut data = Vec::with_capacity(3 * m);
    let mut z_top = 1.0;
    for r in 0..rows {
        let cells = m * (r + 1) / rows - m * r / rows;
        // band height in z is proportional to its cell count (Archimedes)
        let z_bot = 1.0 - 2.0 * (m * (r + 1) / rows) as f64 / m as f64;
        for c in 0..cells {
            let z = z_bot + (z_top - z_bot) * rng.random::<f64>();
            let phi = 2.0 * std::f64::consts::PI * (c as f64 + rng.random::<f64>()) / cells as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let mut x = vec![s * phi.cos(), s * phi.sin(), z];
            linalg::normalize(&mut x);
            data.extend(x);
        }
        z_top = z_bot;
    }
    Ok(DiscreteMeasure::from_flat_raw(Space::Sphere, 3, data))
}

/// Unit vector orthogonal to `c`, uniform among such.
fn uniform_orthogonal<R: Rng + ?Sized>(rng: &mut R, c: &[f64]) -> Vec<f64> {
    loop {
        let mut u = unit_gaussian(rng, c.len());
        let k = linalg::dot(&u, c);
        linalg::axpy(-k, c, &mut u);
        if linalg::normalize(&mut u) > 1e-9 {
            return u;
        }
    }
}

/// `m` uniform points of the spherical cap of angular radius `angle` around
/// `center`.
pub fn uniform_cap<R: Rng + ?Sized>(rng: &mut R, center: &[f64], angle: f64, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(Error::Empty("target"));
    }
    if !(angle > 0.0 && angle <= std::f64::consts::PI) {
        return Err(Error::InvalidConfig(format!("cap angle {angle} outside (0, pi]")));
    }
    let mut c = center.to_vec();
    if c.len() < 2 || linalg::normalize(&mut c) < 1e-12 {
        return Err(Error::InvalidConfig("cap center must be a nonzero vector".into()));
    }
    let d = c.len() - 1;
    let smax = angle.min(std::f64::consts::FRAC_PI_2).sin();
    let mut data = Vec::with_capacity(m * c.len());
    for _ in 0..m {
        // polar angle density is proportional to sin^(d-1)
        let th = loop {
            let th = rng.random::<f64>() * angle;
            if d == 1 || rng.random::<f64>() < (th.sin() / smax).powi(d as i32 - 1) {
                break th;
            }
        };
        let u = uniform_orthogonal(rng, &c);
        let (s, co) = th.sin_cos();
        let mut x: Vec<f64> = c.iter().zip(&u).map(|(a, b)| co * a + s * b).collect();
        linalg::normalize(&mut x);
        data.extend(x);
    }
    Ok(DiscreteMeasure::from_flat_raw(Space::Sphere, d + 1, data))
}

/// Von Mises-Fisher component on `S^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmfComponent {
    pub mean: [f64; 3],
    pub kappa: f64,
    pub weight: f64,
}

fn sample_vmf<R: Rng + ?Sized>(rng: &mut R, mean: &[f64; 3], kappa: f64) -> Vec<f64> {
    let u: f64 = rng.random();
    // inverse CDF of the cosine to the mean
    let w = if kappa < 1e-8 {
        2.0 * u - 1.0
    } else {
        (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
    };
    let v = uniform_orthogonal(rng, mean);
    let s = (1.0 - w * w).max(0.0).sqrt();
    let mut x: Vec<f64> = mean.iter().zip(&v).map(|(a, b)| w * a + s * b).collect();
    linalg::normalize(&mut x);
    x
}

/// `m` draws from a weighted mixture of von Mises-Fisher laws on `S^2`.
pub fn vmf_mixture<R: Rng + ?Sized>(rng: &mut R, comps: &[VmfComponent], m: usize) -> Result<DiscreteMeasure> {
    if m == 0 || comps.is_empty() {
        return Err(Error::Empty("target"));
    }
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    if !(total > 0.0) || comps.iter().any(|c| c.weight < 0.0 || c.kappa < 0.0) {
        return Err(Error::InvalidConfig("mixture weights and concentrations must be nonnegative".into()));
    }
    let means: Vec<[f64; 3]> = comps
        .iter()
        .map(|c| {
            let mut v = c.mean.to_vec();
            if linalg::normalize(&mut v) < 1e-12 {
                return Err(Error::InvalidConfig("mixture mean must be nonzero".into()));
            }
            Ok(linalg::to3(&v))
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(3 * m);
    for _ in 0..m {
        let mut r = rng.random::<f64>() * total;
        let mut k = comps.len() - 1;
        for (i, c) in comps.iter().enumerate() {
            if r < c.weight {
                k = i;
                break;
            }
            r -= c.weight;
        }
        data.extend(sample_vmf(rng, &means[k], comps[k].kappa));
    }
    Ok(DiscreteMeasure::from_flat_raw(Space::Sphere, 3, data))
}

/// Mixture used by the examples: three lobes of different spread.
pub fn default_mixture() -> Vec<VmfComponent> {
    vec![
        VmfComponent { mean: [1.0, 0.0, 0.3], kappa: 8.0, weight: 0.5 },
        VmfComponent { mean: [-0.4, 0.9, -0.2], kappa: 3.0, weight: 0.3 },
        VmfComponent { mean: [0.0, -0.5, -1.0], kappa: 15.0, weight: 0.2 },
    ]
}

/// `m` uniform points of the geodesic ball of `H^d` around the origin whose
/// time coordinate is at most `tmax`.
pub fn uniform_hyper_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, tmax: f64, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 || d == 0 {
        return Err(Error::Empty("target"));
    }
    if !(tmax > 1.0 && tmax.is_finite()) {
        return Err(Error::InvalidConfig(format!("time bound {tmax} must exceed 1")));
    }
    let rmax = tmax.acosh();
    let shmax = rmax.sinh();
    let mut data = Vec::with_capacity(m * (d + 1));
    for _ in 0..m {
        // radial density is proportional to sinh^(d-1)
        let r = if d == 2 {
            (1.0 + rng.random::<f64>() * (tmax - 1.0)).acosh()
        } else {
            loop {
                let r = rng.random::<f64>() * rmax;
                if d == 1 || rng.random::<f64>() < (r.sinh() / shmax).powi(d as i32 - 1) {
                    break r;
                }
            }
        };
        let u = unit_gaussian(rng, d);
        data.extend(u.iter().map(|v| v * r.sinh()));
        data.push(r.cosh());
    }
    Ok(DiscreteMeasure::from_flat_raw(Space::Hyperbolic, d + 1, data))
}
