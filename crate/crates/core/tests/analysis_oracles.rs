//! Diagnostics checked against direct reimplementations and white noise.

use nesots::analysis::*;
use nesots::ot1d::Power;
use nesots::sampler::projective::quaternion_to_matrix;
use nesots::sampler::{targets, DiscreteMeasure, Space};
use nesots::slicing::{sample_slice_hyper, sample_slice_sphere};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn pow(d: f64, p: Power) -> f64 {
    match p {
        Power::One => d,
        Power::Two => d * d,
    }
}

/// Cheapest perfect matching found by trying every permutation.
fn brute_cost(xs: &[f64], ys: &[f64], cost: impl Fn(f64, f64) -> f64) -> f64 {
    permutations(xs.len())
        .iter()
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| cost(xs[i], ys[j])).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn reference_energy(mu: &DiscreteMeasure, nu: &DiscreteMeasure, probes: usize, p: Power, seed: u64) -> f64 {
    let mut rng = probe_rng(seed);
    let d = mu.manifold_dim();
    let n = mu.len() as f64;
    let mut total = 0.0;
    for _ in 0..probes {
        if mu.space() == Space::Hyperbolic {
            let s = sample_slice_hyper(&mut rng, d);
            // signed distance along the geodesic through the origin
            let c = |x: &[f64]| {
                let along: f64 = x.iter().zip(&s.dvec).take(d).map(|(a, b)| a * b).sum();
                0.5 * ((x[d] + along) / (x[d] - along)).ln()
            };
            let xs: Vec<f64> = mu.iter().map(c).collect();
            let ys: Vec<f64> = nu.iter().map(c).collect();
            total += brute_cost(&xs, &ys, |a, b| pow((a - b).abs(), p)) / n;
        } else {
            let s = sample_slice_sphere(&mut rng, d);
            let c = |x: &[f64]| {
                let a: f64 = x.iter().zip(&s.e1).map(|(u, v)| u * v).sum();
                let b: f64 = x.iter().zip(&s.e2).map(|(u, v)| u * v).sum();
                b.atan2(a).rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU
            };
            let xs: Vec<f64> = mu.iter().map(c).collect();
            let ys: Vec<f64> = nu.iter().map(c).collect();
            total += brute_cost(&xs, &ys, |a, b| {
                let t = (a - b).abs();
                pow(t.min(1.0 - t), p)
            }) / n;
        }
    }
    total / probes as f64
}

#[test]
fn energy_matches_brute_force_reimplementation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..6u64 {
        for p in [Power::One, Power::Two] {
            let a = targets::uniform_sphere(&mut rng, 2, 6).unwrap();
            let b = targets::uniform_sphere(&mut rng, 2, 6).unwrap();
            let ours = sw_energy(&a, &b, 4, p, seed).unwrap();
            let want = reference_energy(&a, &b, 4, p, seed);
            assert!((ours - want).abs() < 1e-10, "sphere {ours} vs {want}");

            let a = targets::uniform_hyper_ball(&mut rng, 2, 2.0, 6).unwrap();
            let b = targets::uniform_hyper_ball(&mut rng, 2, 2.0, 6).unwrap();
            let ours = sw_energy(&a, &b, 4, p, seed).unwrap();
            let want = reference_energy(&a, &b, 4, p, seed);
            assert!((ours - want).abs() < 1e-10, "hyperbolic {ours} vs {want}");
        }
    }
}

#[test]
fn energy_is_zero_on_itself_and_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = targets::uniform_sphere(&mut rng, 2, 300).unwrap();
    let b = targets::uniform_sphere(&mut rng, 2, 300).unwrap();
    assert_eq!(sw_energy(&a, &a, 32, Power::Two, 5).unwrap(), 0.0);
    let ab = sw_energy(&a, &b, 32, Power::Two, 5).unwrap();
    let ba = sw_energy(&b, &a, 32, Power::Two, 5).unwrap();
    assert!(ab > 0.0 && (ab - ba).abs() < 1e-12, "{ab} {ba}");
    let h = targets::uniform_hyper_ball(&mut rng, 3, 1.5, 100).unwrap();
    assert_eq!(sw_energy(&h, &h, 16, Power::One, 5).unwrap(), 0.0);
}

#[test]
fn energy_rejects_bad_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = targets::uniform_sphere(&mut rng, 2, 10).unwrap();
    let s3 = targets::uniform_sphere(&mut rng, 3, 10).unwrap();
    let h = targets::uniform_hyper_ball(&mut rng, 2, 1.5, 10).unwrap();
    assert!(sw_energy(&s, &s, 0, Power::Two, 0).is_err());
    assert!(sw_energy(&s, &s3, 4, Power::Two, 0).is_err());
    assert!(sw_energy(&s, &h, 4, Power::Two, 0).is_err());
    assert!(s.select(&[]).is_err());
}

fn uniform3(rng: &mut impl Rng, n: usize) -> Vec<[f64; 3]> {
    let m = targets::uniform_sphere(rng, 2, n).unwrap();
    m.iter().map(|x| [x[0], x[1], x[2]]).collect()
}

#[test]
fn white_noise_spectrum_is_flat() {
    let (lo, hi) = (&mut 0.0, &mut 0.0);
    for seed in 0..16u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = sphere_power_spectrum(&uniform3(&mut rng, 2048), 32).unwrap();
        assert!((r.power[0] - 2048.0).abs() < 1e-6);
        *lo += r.band_mean(1, 10) / 16.0;
        *hi += r.band_mean(11, 32) / 16.0;
    }
    assert!((*lo - 1.0).abs() < 0.15, "low band {lo}");
    assert!((*hi - 1.0).abs() < 0.15, "high band {hi}");
}

#[test]
fn spectrum_ignores_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pts = uniform3(&mut rng, 200);
    pts.extend(pts.clone().iter().map(|p| p.map(|v| -v)));
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= n);
    let m = quaternion_to_matrix(&q);
    let rot: Vec<[f64; 3]> =
        pts.iter().map(|p| std::array::from_fn(|i| (0..3).map(|k| m[i][k] * p[k]).sum())).collect();
    let a = sphere_power_spectrum(&pts, 24).unwrap();
    let b = sphere_power_spectrum(&rot, 24).unwrap();
    for (l, (x, y)) in a.power.iter().zip(&b.power).enumerate() {
        assert!((x - y).abs() < 1e-9, "l = {l}: {x} vs {y}");
        // odd degrees cancel on antipodal sets
        if l % 2 == 1 {
            assert!(x.abs() < 1e-9);
        }
    }
    assert!(sphere_power_spectrum(&[], 4).is_err());
}

#[test]
fn white_noise_pcf_is_flat_and_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Vec<f64>> = uniform3(&mut rng, 2048).iter().map(|p| p.to_vec()).collect();
    let r = sphere_pcf(&pts, std::f64::consts::PI, 64).unwrap();
    let pairs = 2048 * 2047 / 2;
    assert_eq!(r.counts.iter().sum::<u64>(), pairs);
    let expected: f64 = r.expected.iter().sum();
    assert!((expected / pairs as f64 - 1.0).abs() < 0.02, "expected total {expected}");
    for (k, g) in r.g.iter().enumerate().skip(2) {
        assert!((g - 1.0).abs() < 0.2, "bin {k}: g = {g}");
    }
}

#[test]
fn pcf_rejects_bad_inputs() {
    let pts = vec![vec![1.0, 0.0, 0.0]];
    assert!(sphere_pcf(&pts, 1.0, 10).is_err());
    let two = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    assert!(sphere_pcf(&two, 0.0, 10).is_err());
    assert!(sphere_pcf(&two, 1.0, 0).is_err());
    // a pair at exactly rmax falls in the last bin
    let r = sphere_pcf(&two, std::f64::consts::FRAC_PI_2, 4).unwrap();
    assert_eq!(r.counts, vec![0, 0, 0, 1]);
}
