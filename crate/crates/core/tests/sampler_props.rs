//! Behavioural properties of the sliced optimizer.

use nesots::analysis::sw_energy;
use nesots::manifold::{hyperbolic, sphere};
use nesots::ot1d::Power;
use nesots::sampler::projective::*;
use nesots::sampler::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn min_pairwise(m: &DiscreteMeasure) -> f64 {
    let hyper = m.space() == Space::Hyperbolic;
    let mut best = f64::INFINITY;
    for i in 0..m.len() {
        for j in 0..i {
            let d = if hyper {
                hyperbolic::dist_raw(m.atom(i), m.atom(j))
            } else {
                sphere::dist_raw(m.atom(i), m.atom(j))
            };
            best = best.min(d);
        }
    }
    best
}

fn max_atom_gap(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| nesots::linalg::dist(x, y)).fold(0.0, f64::max)
}

fn random_rotation(rng: &mut impl Rng) -> Vec<f64> {
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= n);
    quaternion_to_matrix(&q).iter().flatten().copied().collect()
}

#[test]
fn identical_measures_are_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for nu in [
        targets::uniform_sphere(&mut rng, 2, 200).unwrap(),
        targets::uniform_hyper_ball(&mut rng, 2, 1.5, 200).unwrap(),
    ] {
        let cfg = SamplerConfig::new(200, 200).with_iterations(5).with_seed(3);
        let (out, _) = nesots_run_from(nu.clone(), &nu, &cfg, &RunOptions::default()).unwrap();
        assert!(max_atom_gap(&out, &nu) < 1e-9);
    }
}

#[test]
fn common_rotation_commutes_with_the_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let nu = targets::vmf_mixture(&mut rng, &targets::default_mixture(), 512).unwrap();
    let r = random_rotation(&mut rng);
    let cfg = SamplerConfig::new(64, 512).with_iterations(5).with_seed(9);
    let mu0 = initial_subsample(&nu, &cfg).unwrap();
    let (out, _) = nesots_run_from(mu0.clone(), &nu, &cfg, &RunOptions::default()).unwrap();
    let opts = RunOptions { slice_frame: Some(r.clone()) };
    let (out_r, _) =
        nesots_run_from(mu0.transformed(&r).unwrap(), &nu.transformed(&r).unwrap(), &cfg, &opts).unwrap();
    assert!(max_atom_gap(&out.transformed(&r).unwrap(), &out_r) < 1e-9);
}

#[test]
fn single_slice_pooling_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let nu = targets::uniform_sphere(&mut rng, 2, 1000).unwrap();
    let cfg = SamplerConfig::new(100, 1000).with_iterations(10).with_batch(1).with_seed(4);
    let (a, _) = nesots_run(&nu, &cfg.clone().with_pooling(Pooling::Mean)).unwrap();
    let (b, _) = nesots_run(&nu, &cfg.with_pooling(Pooling::GeometricMedian)).unwrap();
    assert_eq!(a.flat(), b.flat());
}

#[test]
fn projective_run_ignores_representative_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = targets::uniform_sphere(&mut rng, 2, 300).unwrap();
    let nu = base.symmetrized().unwrap().with_space(Space::Projective).unwrap();
    let cfg = SamplerConfig::new(50, 600).with_iterations(20).with_seed(5);
    // distinct lines: two signs of one line would tie exactly on every slice
    let idx: Vec<usize> = (0..50).collect();
    let mu0 = base.select(&idx).unwrap().with_space(Space::Projective).unwrap();
    let mut flipped = mu0.flat().to_vec();
    for (i, x) in flipped.chunks_exact_mut(3).enumerate() {
        if rng.random::<bool>() || i == 0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let flipped = DiscreteMeasure::from_flat(Space::Projective, 3, flipped, 1e-9).unwrap();
    let (a, _) = projective_run_from(mu0, &nu, &cfg, &RunOptions::default()).unwrap();
    let (b, _) = projective_run_from(flipped, &nu, &cfg, &RunOptions::default()).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        let (mut x, mut y) = (x.to_vec(), y.to_vec());
        canonical_sign(&mut x);
        canonical_sign(&mut y);
        assert!(nesots::linalg::dist(&x, &y) < 1e-9);
    }
}

#[test]
fn projective_single_point_finds_the_axis() {
    let z = [0.48, -0.6, 0.64];
    let nu = DiscreteMeasure::from_rows(Space::Sphere, vec![z.to_vec(), z.iter().map(|v| -v).collect()], 1e-9).unwrap();
    let mu0 = DiscreteMeasure::from_rows(Space::Projective, vec![vec![0.0, 0.6, 0.8]], 1e-9).unwrap();
    let cfg = SamplerConfig::new(1, 2).with_iterations(300).with_seed(6);
    let (out, _) = projective_run_from(mu0, &nu, &cfg, &RunOptions::default()).unwrap();
    let mut x = out.atom(0).to_vec();
    canonical_sign(&mut x);
    assert!(nesots::linalg::dist(&x, &z) < 1e-6, "{x:?}");
}

#[test]
fn config_violations_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nu = targets::uniform_sphere(&mut rng, 2, 50).unwrap();
    assert!(nesots_run(&nu, &SamplerConfig::new(100, 50)).is_err());
    assert!(projective_run(&nu, &SamplerConfig::new(30, 50)).is_err());
    let mut cfg = SamplerConfig::new(10, 50);
    cfg.decay = 1.5;
    assert!(nesots_run(&nu, &cfg).is_err());
}

#[test]
fn sphere_energy_drops_and_trends_down() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let nu = targets::uniform_sphere(&mut rng, 2, 8192).unwrap();
    let cfg = SamplerConfig::new(1024, 8192).with_iterations(200).with_seed(7);
    let mu0 = initial_subsample(&nu, &cfg).unwrap();
    let e0 = sw_energy(&mu0, &nu, 256, Power::Two, 11).unwrap();
    let (mu, trace) = nesots_run(&nu, &cfg).unwrap();
    let e1 = sw_energy(&mu, &nu, 256, Power::Two, 11).unwrap();
    assert!(e1 < 0.25 * e0, "energy {e0:e} -> {e1:e}");
    let w = trace.windowed_means(20);
    assert!(w.windows(2).all(|p| p[1] <= p[0]), "windows {w:?}");
}

#[test]
fn hyperbolic_outputs_spread_apart() {
    let (mut ours, mut white) = (0.0, 0.0);
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let nu = targets::uniform_hyper_ball(&mut rng, 2, 1.5, 4096).unwrap();
        let cfg = SamplerConfig::new(512, 4096).with_iterations(200).with_seed(seed);
        white += min_pairwise(&initial_subsample(&nu, &cfg).unwrap());
        ours += min_pairwise(&nesots_run(&nu, &cfg).unwrap().0);
    }
    assert!(ours > 3.0 * white, "min distance {ours} vs white {white}");
}

#[test]
fn quaternion_signs_act_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let r = random_rotation(&mut rng);
        let mut q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        q.iter_mut().for_each(|v| *v /= n);
        let neg = q.map(|v| -v);
        let v = [r[0], r[1], r[2]];
        let (a, b) = (quat_rotate(&q, &v), quat_rotate(&neg, &v));
        assert!(nesots::linalg::dist(&a, &b) < 1e-12);
        let m = quaternion_to_matrix(&q);
        for i in 0..3 {
            let row: f64 = (0..3).map(|k| m[i][k] * v[k]).sum();
            assert!((row - a[i]).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn affine_lines_roundtrip(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, seed in any::<u64>()) {
        prop_assume!(a.hypot(b) > 1e-3);
        let m = make_affine_line_measure(&[[a, b, c]]).unwrap();
        let l = affine_line_from_atom(m.atom(0)).unwrap();
        prop_assert!((l[0].hypot(l[1]) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let (px, py) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
            let want = line_signed_distance(&[a, b, c], px, py);
            prop_assert!((line_signed_distance(&l, px, py) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn subsample_draws_distinct_atoms(m in 1usize..200, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nu = targets::uniform_sphere(&mut rng, 2, m).unwrap();
        let k = ((m as f64 * frac) as usize).max(1);
        let s = subsample(&nu, k, &mut rng).unwrap();
        prop_assert_eq!(s.len(), k);
        let mut rows = s.rows();
        rows.sort_by(|x, y| x.partial_cmp(y).unwrap());
        rows.dedup();
        prop_assert_eq!(rows.len(), k);
        prop_assert!(subsample(&nu, m + 1, &mut rng).is_err());
    }
}
