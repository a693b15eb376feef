//! Geometry kernel checks on random inputs for both models.

use nesots::linalg;
use nesots::manifold::{hyperbolic, lorentz_dot, sphere, HyperPoint, SpherePoint, TangentVec};
use nesots::slicing::sample_slice_hyper;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn gauss(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn sphere_point(rng: &mut impl Rng, d: usize) -> SpherePoint {
    SpherePoint::from_ambient(gauss(rng, d + 1)).unwrap()
}

fn hyper_point(rng: &mut impl Rng, d: usize, spread: f64) -> HyperPoint {
    let s: Vec<f64> = gauss(rng, d).iter().map(|v| v * spread).collect();
    HyperPoint::from_spatial(&s)
}

/// Random tangent vector at `x` with norm in `(0, max)`.
fn sphere_tangent(rng: &mut impl Rng, x: &SpherePoint, max: f64) -> TangentVec {
    let mut v = gauss(rng, x.coords().len());
    sphere::project_tangent(x.coords(), &mut v);
    linalg::normalize(&mut v);
    TangentVec(v).scaled(max * rng.random::<f64>())
}

fn hyper_tangent(rng: &mut impl Rng, x: &HyperPoint, max: f64) -> TangentVec {
    let mut v = gauss(rng, x.coords().len());
    hyperbolic::project_tangent(x.coords(), &mut v);
    let n = lorentz_dot(&v, &v).unwrap().sqrt();
    TangentVec(v).scaled(max * rng.random::<f64>() / n)
}

fn ldot(a: &[f64], b: &[f64]) -> f64 {
    lorentz_dot(a, b).unwrap()
}

#[test]
fn kernel_roundtrip_and_isometry_batch() {
    let t0 = Instant::now();
    let cases = 10_000;
    let mut worst = [0.0f64; 4];
    for d in [2, 3, 5, 10] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..cases {
            // sphere
            let x = sphere_point(&mut rng, d);
            let v = sphere_tangent(&mut rng, &x, 3.0);
            let y = sphere::exp(&x, &v).unwrap();
            let back = sphere::log(&x, &y).unwrap();
            let y2 = sphere::exp(&x, &back).unwrap();
            worst[0] = worst[0].max(linalg::dist(&back.0, &v.0)).max(linalg::dist(y2.coords(), y.coords()));
            let (w1, w2) = (gauss(&mut rng, d + 1), gauss(&mut rng, d + 1));
            let (mut g1, mut g2, mut gx) = (vec![0.0; d + 1], vec![0.0; d + 1], vec![0.0; d + 1]);
            sphere::rotate_into(x.coords(), y.coords(), &w1, &mut g1);
            sphere::rotate_into(x.coords(), y.coords(), &w2, &mut g2);
            sphere::rotate_into(x.coords(), y.coords(), x.coords(), &mut gx);
            worst[1] = worst[1]
                .max((linalg::dot(&g1, &g2) - linalg::dot(&w1, &w2)).abs())
                .max(linalg::dist(&gx, y.coords()));

            // hyperboloid
            let x = hyper_point(&mut rng, d, 1.0);
            let v = hyper_tangent(&mut rng, &x, 3.0);
            let y = hyperbolic::exp(&x, &v).unwrap();
            let back = hyperbolic::log(&x, &y).unwrap();
            let y2 = hyperbolic::exp(&x, &back).unwrap();
            let rel = |a: &[f64], b: &[f64]| linalg::dist(a, b) / linalg::norm(b).max(1.0);
            worst[2] = worst[2].max(rel(&back.0, &v.0)).max(rel(y2.coords(), y.coords()));
            let s = sample_slice_hyper(&mut rng, d);
            let (a, b) = (4.0 * rng.random::<f64>() - 2.0, 4.0 * rng.random::<f64>() - 2.0);
            let (pa, pb) = (s.point_at(a), s.point_at(b));
            hyperbolic::rotate_into(&pa, &pb, &w1, &mut g1);
            hyperbolic::rotate_into(&pa, &pb, &w2, &mut g2);
            hyperbolic::rotate_into(&pa, &pb, &pa, &mut gx);
            let scale = (linalg::norm(&g1) * linalg::norm(&g2)).max(1.0);
            worst[3] = worst[3]
                .max((ldot(&g1, &g2) - ldot(&w1, &w2)).abs() / scale)
                .max(rel(&gx, &pb));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(worst.iter().all(|&e| e < 1e-8), "worst errors {worst:?}");
    assert!(secs < 5.0, "took {secs:.2}s");
}

fn dim() -> impl Strategy<Value = usize> {
    2usize..=10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sphere_distance_is_a_metric(d in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (sphere_point(&mut rng, d), sphere_point(&mut rng, d), sphere_point(&mut rng, d));
        prop_assert!((sphere::dist(&x, &y) - sphere::dist(&y, &x)).abs() < 1e-12);
        prop_assert!(sphere::dist(&x, &z) <= sphere::dist(&x, &y) + sphere::dist(&y, &z) + 1e-8);
    }

    #[test]
    fn hyper_distance_is_a_metric(d in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (hyper_point(&mut rng, d, 1.0), hyper_point(&mut rng, d, 1.0), hyper_point(&mut rng, d, 1.0));
        prop_assert!((hyperbolic::dist(&x, &y) - hyperbolic::dist(&y, &x)).abs() < 1e-12);
        prop_assert!(hyperbolic::dist(&x, &z) <= hyperbolic::dist(&x, &y) + hyperbolic::dist(&y, &z) + 1e-8);
    }

    #[test]
    fn sphere_exp_travels_tangent_length(d in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sphere_point(&mut rng, d);
        let v = sphere_tangent(&mut rng, &x, std::f64::consts::PI);
        let y = sphere::exp(&x, &v).unwrap();
        prop_assert!((sphere::dist(&y, &x) - linalg::norm(&v.0)).abs() < 1e-9);
    }

    #[test]
    fn hyper_exp_travels_tangent_length(d in dim(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = hyper_point(&mut rng, d, 1.0);
        let v = hyper_tangent(&mut rng, &x, 4.0);
        let y = hyperbolic::exp(&x, &v).unwrap();
        let len = ldot(&v.0, &v.0).sqrt();
        prop_assert!((hyperbolic::dist(&y, &x) - len).abs() < 1e-8);
        prop_assert!(v.is_tangent_to_hyper(&x, 1e-9));
    }

    #[test]
    fn sphere_rotation_fixes_complement(d in 3usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (sphere_point(&mut rng, d), sphere_point(&mut rng, d));
        // remove the span{x, y} part of a random vector
        let mut w = gauss(&mut rng, d + 1);
        let mut yt = y.coords().to_vec();
        linalg::axpy(-linalg::dot(&yt, x.coords()), x.coords(), &mut yt);
        linalg::normalize(&mut yt);
        linalg::axpy(-linalg::dot(&w, x.coords()), x.coords(), &mut w);
        linalg::axpy(-linalg::dot(&w, &yt), &yt, &mut w);
        let mut out = vec![0.0; d + 1];
        sphere::rotate_into(x.coords(), y.coords(), &w, &mut out);
        prop_assert!(linalg::dist(&out, &w) < 1e-12);
    }

    #[test]
    fn boost_fixes_complement(d in 2usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sample_slice_hyper(&mut rng, d);
        let (x, y) = (s.point_at(-1.2), s.point_at(0.9));
        let mut w = gauss(&mut rng, d + 1);
        w[d] = 0.0;
        linalg::axpy(-linalg::dot(&w, &s.dvec), &s.dvec, &mut w);
        let mut out = vec![0.0; d + 1];
        hyperbolic::rotate_into(&x, &y, &w, &mut out);
        prop_assert!(linalg::dist(&out, &w) < 1e-12);
    }
}
