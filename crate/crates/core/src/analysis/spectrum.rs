//! Angular power spectrum of point sets on `S^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `power[l]` for degrees `0..=lmax`; white noise has expectation 1 for
    /// `l >= 1`.
    pub power: Vec<f64>,
}

impl SpectrumReport {
    pub fn lmax(&self) -> usize {
        self.power.len() - 1
    }

    /// Mean power over degrees `lo..=hi`.
    pub fn band_mean(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.lmax());
        self.power[lo..=hi].iter().sum::<f64>() / (hi + 1 - lo) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,power\n");
        for (l, p) in self.power.iter().enumerate() {
            s.push_str(&format!("{l},{p:.17e}\n"));
        }
        s
    }
}

/// Orthonormal associated Legendre values `Pbar_l^m(cos th)` for
/// `0 <= m <= l <= lmax`, stored at `l (l + 1) / 2 + m`.
fn legendre_table(lmax: usize, c: f64, s: f64, out: &mut [f64]) {
    let at = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        out[at(m, m)] = pmm;
        if m < lmax {
            out[at(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * c * pmm;
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            out[at(l, m)] = a * (c * out[at(l - 1, m)] - b * out[at(l - 2, m)]);
        }
    }
}

/// `power[l] = 4 pi / (n (2l + 1)) * sum_m |sum_i Y_lm(x_i)|^2` with real
/// orthonormal harmonics.
pub fn sphere_power_spectrum(points: &[[f64; 3]], lmax: usize) -> Result<SpectrumReport> {
    if points.is_empty() {
        return Err(Error::Empty("points"));
    }
    let tri = (lmax + 1) * (lmax + 2) / 2;
    let mut re = vec![0.0; tri];
    let mut im = vec![0.0; tri];
    let mut leg = vec![0.0; tri];
    for p in points {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let c = (p[2] / r).clamp(-1.0, 1.0);
        let s = p[0].hypot(p[1]) / r;
        let phi = p[1].atan2(p[0]);
        legendre_table(lmax, c, s, &mut leg);
        for m in 0..=lmax {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            for l in m..=lmax {
                let k = l * (l + 1) / 2 + m;
                re[k] += leg[k] * cm;
                im[k] += leg[k] * sm;
            }
        }
    }
    let n = points.len() as f64;
    let power = (0..=lmax)
        .map(|l| {
            let base = l * (l + 1) / 2;
            let mut acc = re[base] * re[base];
            for m in 1..=l {
                acc += 2.0 * (re[base + m] * re[base + m] + im[base + m] * im[base + m]);
            }
            4.0 * PI * acc / (n * (2 * l + 1) as f64)
        })
        .collect();
    Ok(SpectrumReport { power })
}
