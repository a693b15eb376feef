//! Pair correlation functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcfReport {
    pub centers: Vec<f64>,
    pub g: Vec<f64>,
    /// Raw pair counts per bin.
    pub counts: Vec<u64>,
    /// Expected pair counts per bin under the reference process.
    pub expected: Vec<f64>,
}

impl PcfReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,g\n");
        for (r, g) in self.centers.iter().zip(&self.g) {
            s.push_str(&format!("{r:.17e},{g:.17e}\n"));
        }
        s
    }
}

/// Distribution of the distance between two independent uniform points.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Uniform measure of the unit sphere `S^d`; density `sin^(d-1) r` on
    /// `[0, pi]`.
    Sphere { d: usize },
    /// Empirical pair distances of a reference uniform set.
    Samples(Vec<f64>),
}

impl Reference {
    /// Probability mass of each of the `bins` intervals of `[0, rmax]`.
    fn bin_mass(&self, rmax: f64, bins: usize) -> Vec<f64> {
        let w = rmax / bins as f64;
        match self {
            Reference::Sphere { d } => {
                let k = (*d as i32 - 1).max(0);
                let pdf = |r: f64| r.sin().max(0.0).powi(k);
                let integ = |a: f64, b: f64| {
                    // composite Simpson on a fixed grid
                    let steps = 64;
                    let h = (b - a) / steps as f64;
                    let mut s = pdf(a) + pdf(b);
                    for i in 1..steps {
                        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                    }
                    s * h / 3.0
                };
                let total: f64 = (0..256).map(|i| integ(i as f64 * std::f64::consts::PI / 256.0, (i + 1) as f64 * std::f64::consts::PI / 256.0)).sum();
                (0..bins)
                    .map(|i| {
                        let a = (i as f64 * w).min(std::f64::consts::PI);
                        let b = ((i + 1) as f64 * w).min(std::f64::consts::PI);
                        integ(a, b) / total
                    })
                    .collect()
            }
            Reference::Samples(ds) => {
                let mut mass = vec![0.0; bins];
                for &r in ds {
                    if let Some(b) = bin_of(r, w, bins) {
                        mass[b] += 1.0;
                    }
                }
                let tot = ds.len().max(1) as f64;
                mass.iter_mut().for_each(|m| *m /= tot);
                mass
            }
        }
    }
}

fn bin_of(r: f64, w: f64, bins: usize) -> Option<usize> {
    if !(r >= 0.0) {
        return None;
    }
    let b = (r / w) as usize;
    if b < bins {
        Some(b)
    } else if b == bins && r <= w * bins as f64 {
        Some(bins - 1)
    } else {
        None
    }
}

/// Histogram of the `n (n - 1) / 2` pairwise distances over `bins` equal
/// bins of `[0, rmax]`, divided by the expected count under `reference`.
pub fn pair_correlation<F>(n: usize, dist: F, reference: &Reference, rmax: f64, bins: usize) -> Result<PcfReport>
where
    F: Fn(usize, usize) -> f64,
{
    if !(rmax > 0.0) {
        return Err(Error::InvalidConfig(format!("rmax = {rmax} must be positive")));
    }
    if bins == 0 {
        return Err(Error::InvalidConfig("need at least one bin".into()));
    }
    if n < 2 {
        return Err(Error::Empty("pair_correlation needs two samples"));
    }
    let w = rmax / bins as f64;
    let mut counts = vec![0u64; bins];
    for i in 0..n {
        for j in i + 1..n {
            if let Some(b) = bin_of(dist(i, j), w, bins) {
                counts[b] += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected: Vec<f64> = reference.bin_mass(rmax, bins).iter().map(|m| m * pairs).collect();
    let g = counts
        .iter()
        .zip(&expected)
        .map(|(&c, &e)| if e > 0.0 { c as f64 / e } else { 0.0 })
        .collect();
    let centers = (0..bins).map(|i| (i as f64 + 0.5) * w).collect();
    Ok(PcfReport { centers, g, counts, expected })
}

/// Pair correlation of points of `S^d` under the geodesic distance.
pub fn sphere_pcf(points: &[Vec<f64>], rmax: f64, bins: usize) -> Result<PcfReport> {
    let d = points.first().map_or(2, |p| p.len().saturating_sub(1));
    pair_correlation(
        points.len(),
        |i, j| crate::manifold::sphere::dist_raw(&points[i], &points[j]),
        &Reference::Sphere { d },
        rmax,
        bins,
    )
}
