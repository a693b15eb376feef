//! Mesh loading, Yamabe flow, layouts and both sampling pipelines.

use std::f64::consts::TAU;
use std::time::Instant;

use nesots::analysis::mesh_pcf;
use nesots::linalg;
use nesots::manifold::sphere;
use nesots::mesh::*;
use nesots::sampler::SamplerConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn genus2() -> TriMesh {
    generate::holed_slab(2, 4, 10).unwrap()
}

fn unit(p: &[f64; 3]) -> [f64; 3] {
    let mut q = *p;
    linalg::normalize(&mut q);
    q
}

fn min_arc(samples: &[MeshSample]) -> f64 {
    let pts: Vec<[f64; 3]> = samples.iter().map(|s| unit(&s.position)).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            best = best.min(sphere::dist_raw(&pts[i], &pts[j]));
        }
    }
    best
}

#[test]
fn obj_files_roundtrip_with_genus() {
    let dir = tempfile::tempdir().unwrap();
    let m = genus2();
    let path = dir.path().join("g2.obj");
    write_obj(&path, &m).unwrap();
    let back = load_mesh(&path).unwrap();
    assert_eq!(back.genus(), 2);
    assert_eq!(back.faces(), m.faces());
    assert_eq!(back.euler_characteristic(), -2);

    // one triangle has boundary edges
    let open = dir.path().join("open.obj");
    std::fs::write(&open, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    assert!(load_mesh(&open).is_err());
}

#[test]
fn face_selection_follows_area_and_density() {
    let m = generate::ellipsoid(1, 1.0, 1.3, 2.0);
    let areas: Vec<f64> = (0..m.num_faces()).map(|f| m.face_area(f)).collect();
    let total: f64 = areas.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = sample_faces(&m, &Density::Uniform, 20_000, &mut rng).unwrap();
    let big = (0..m.num_faces()).max_by(|&a, &b| areas[a].total_cmp(&areas[b])).unwrap();
    let freq = s.iter().filter(|x| x.face == big).count() as f64 / 20_000.0;
    assert!((freq - areas[big] / total).abs() < 0.02);

    let mut one = vec![0.0; m.num_faces()];
    one[7] = 2.0;
    let s = sample_faces(&m, &Density::PerFace(one), 500, &mut rng).unwrap();
    assert!(s.iter().all(|x| x.face == 7));
    assert!(sample_faces(&m, &Density::Uniform, 0, &mut rng).unwrap().is_empty());
    assert!(sample_faces(&m, &Density::PerFace(vec![0.0; m.num_faces()]), 5, &mut rng).is_err());
}

#[test]
fn yamabe_flow_certificate_and_gauss_bonnet() {
    let m = generate::holed_slab(2, 8, 20).unwrap();
    assert!(m.num_vertices() <= 10_000);
    let t = Instant::now();
    let (u, rep) = yamabe_flow(&m, &YamabeOptions::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    // certificate recomputed from the returned factors
    let th = angle_sums(&m, &u.u).unwrap();
    let defect = th.iter().map(|t| (t - TAU).abs()).fold(0.0, f64::max);
    assert!(defect < 1e-8, "defect {defect:e}");
    // discrete Gauss-Bonnet at a constant small-area start, measured here
    // against the area of that metric summed face by face
    let c0 = rep.small_start;
    let start = vec![c0; m.num_vertices()];
    let th0 = angle_sums(&m, &start).unwrap();
    let deficit: f64 = th0.iter().map(|t| TAU - t).sum();
    let len = yamabe::hyperbolic_lengths(&m, &start);
    let area: f64 = m
        .face_edges()
        .iter()
        .map(|fe| yamabe::triangle_area([len[fe[0]], len[fe[1]], len[fe[2]]]).unwrap())
        .sum();
    let chi = m.euler_characteristic() as f64;
    assert!((deficit - area - TAU * chi).abs() < 1e-6);
    assert!(rep.gauss_bonnet_error.abs() < 1e-6);
    assert!(secs < 60.0, "flow took {secs:.1}s");

    // converged factors are a fixed point
    let (again, rep2) = yamabe_flow_from(&m, u.u.clone(), &YamabeOptions::default()).unwrap();
    assert_eq!(rep2.iterations, 0);
    assert_eq!(again.u, u.u);
}

#[test]
fn flow_rejects_low_genus() {
    let torus = generate::torus(2.0, 0.7, 24, 12).unwrap();
    assert!(yamabe_flow(&torus, &YamabeOptions::default()).is_err());
    assert!(yamabe_flow(&generate::icosphere(2), &YamabeOptions::default()).is_err());
}

#[test]
fn layouts_are_isometric_and_grow_with_eps() {
    let m = genus2();
    let (u, _) = yamabe_flow(&m, &YamabeOptions::default()).unwrap();
    let nv = m.num_vertices();
    let mut prev = 0usize;
    for eps in [1.1, 1.5, 2.6] {
        let mut faces = 0;
        for k in 0..10 {
            let l = build_local_layout(&m, &u, k * nv / 10, eps).unwrap();
            assert!(l.max_edge_error(&m, &u) < 1e-6);
            assert_eq!(l.vertex(k * nv / 10), Some([0.0, 0.0, 1.0]));
            faces += l.num_faces();
        }
        assert!(faces > prev);
        prev = faces;
    }
    let tiny = build_local_layout(&m, &u, 0, 1.0 + 1e-9).unwrap();
    assert_eq!(tiny.num_faces(), 0);
    assert!(build_local_layout(&m, &u, 0, 1.0).is_err());
}

#[test]
fn restriction_and_ray_mapping_invert_each_other() {
    let m = genus2();
    let (u, _) = yamabe_flow(&m, &YamabeOptions::default()).unwrap();
    let l = build_local_layout(&m, &u, 5, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let placed: Vec<usize> = l.faces().iter().map(|pf| pf.face).collect();
    let samples: Vec<MeshSample> = (0..1000)
        .map(|_| {
            let f = placed[rng.random_range(0..placed.len())];
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            MeshSample::new(&m, f, [1.0 - a - b, a, b]).unwrap()
        })
        .collect();
    let r = l.restrict(&samples);
    assert_eq!(r.len(), 1000);
    let back = l.map_to_mesh(&m, &r.points);
    for (s, b) in samples.iter().zip(&back) {
        let b = b.expect("on-patch point missed");
        assert_eq!(b.face, s.face);
        let err = s.bary.iter().zip(&b.bary).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "bary error {err:e}");
    }

    // a corner maps to its layout position, unplaced faces drop out
    let f = placed[0];
    let v = m.faces()[f][1];
    let at = MeshSample::new(&m, f, [0.0, 1.0, 0.0]).unwrap();
    let p = l.restrict(&[at]).points[0];
    assert!(linalg::dist(&p, &l.vertex(v).unwrap()) < 1e-12);
    if let Some(off) = (0..m.num_faces()).find(|&f| l.placed_face(f).is_none()) {
        let s = MeshSample::new(&m, off, [1.0 / 3.0; 3]).unwrap();
        assert!(l.restrict(&[s]).is_empty());
    }
}

#[test]
fn spherical_pipeline_beats_white_noise() {
    let m = generate::icosphere(3);
    let layout = Layout::spherical(&m, m.vertices()).unwrap();
    let (mut ours, mut white) = (0.0, 0.0);
    for seed in 0..5 {
        let cfg = SamplerConfig::new(256, 2048).with_iterations(100).with_seed(seed);
        let (out, _) = sample_mesh_spherical(&m, &layout, &Density::Uniform, &cfg).unwrap();
        let white_set = sample_faces(&m, &Density::Uniform, 256, &mut ChaCha8Rng::seed_from_u64(50 + seed)).unwrap();
        ours += min_arc(&out);
        white += min_arc(&white_set);
    }
    assert!(ours > 3.0 * white, "min arc {ours} vs white {white}");
}

#[test]
fn density_support_is_respected() {
    let m = generate::icosphere(3);
    let layout = Layout::spherical(&m, m.vertices()).unwrap();
    let north: Vec<f64> = (0..m.num_faces())
        .map(|f| {
            let z: f64 = m.faces()[f].iter().map(|&v| m.vertices()[v][2]).sum();
            if z > 0.0 { 1.0 } else { 0.0 }
        })
        .collect();
    let cfg = SamplerConfig::new(256, 2048).with_iterations(100).with_seed(4);
    let (out, _) = sample_mesh_spherical(&m, &layout, &Density::PerFace(north.clone()), &cfg).unwrap();
    assert!(out.iter().all(|s| north[s.face] > 0.0));
}

#[test]
fn fallback_embedding_behaviour() {
    // a round mesh is its own layout
    let ico = generate::icosphere(2);
    let (l, rep) = embed_sphere_fallback(&ico, 0).unwrap();
    for v in 0..ico.num_vertices() {
        assert!(linalg::dist(&l.vertex(v).unwrap(), &ico.vertices()[v]) < 1e-9);
    }
    assert_eq!(rep.flips, vec![0]);

    // convex input never flips; edge spread shrinks every step
    let e = generate::ellipsoid(3, 1.0, 1.5, 3.0);
    let (_, rep) = embed_sphere_fallback(&e, 50).unwrap();
    assert!(rep.flips.iter().all(|&f| f == 0));
    assert_eq!(rep.distortion.len(), 51);
    assert!(rep.distortion.windows(2).all(|w| w[1] <= w[0]), "{:?}", rep.distortion);

    assert!(embed_sphere_fallback(&genus2(), 5).is_err());
}

#[test]
fn smoothed_embedding_gives_blue_noise() {
    let e = generate::ellipsoid(3, 1.0, 1.3, 1.8);
    let (layout, _) = embed_sphere_fallback(&e, 50).unwrap();
    let n = 512;
    let cfg = SamplerConfig::new(n, 4096).with_iterations(150).with_seed(2);
    let (out, _) = sample_mesh_spherical(&e, &layout, &Density::Uniform, &cfg).unwrap();
    let r0 = (e.total_area() / n as f64).sqrt();
    let pcf = mesh_pcf(&e, &out, 2048, 4.0 * r0, 32, 1).unwrap();
    assert!(pcf.g[0] < 0.1, "first bins {:?}", &pcf.g[..4]);
}

#[test]
fn patch_rounds_pop_least_visited() {
    let m = genus2();
    let (u, _) = yamabe_flow(&m, &YamabeOptions::default()).unwrap();
    let cfg = HyperbolicConfig::new(128, 1024).with_rounds(40).with_seed(3);
    let (out, rep) = sample_mesh_hyperbolic(&m, &u, &Density::Uniform, &cfg).unwrap();
    assert_eq!(out.len(), 128);
    assert_eq!(rep.rounds.len(), 40);
    assert_eq!(rep.energy.len(), 41);
    for r in &rep.rounds {
        assert_eq!(r.visits_at_pop, r.min_visits);
    }
    let (again, _) = sample_mesh_hyperbolic(&m, &u, &Density::Uniform, &cfg).unwrap();
    assert_eq!(out, again);

    // no rounds: the initial subsample comes back untouched
    let (init, rep0) = sample_mesh_hyperbolic(&m, &u, &Density::Uniform, &cfg.clone().with_rounds(0)).unwrap();
    assert!(rep0.rounds.is_empty());
    assert_eq!(init.len(), 128);
    assert_ne!(init, out);

    let torus = generate::torus(2.0, 0.7, 24, 12).unwrap();
    let zero = ConformalFactors { u: vec![0.0; torus.num_vertices()] };
    assert!(sample_mesh_hyperbolic(&torus, &zero, &Density::Uniform, &cfg).is_err());
}

/// Mean sliced energy between samples and target on fixed patches of
/// threshold 1.5, shared by runs with different thresholds.
fn common_patch_energy(mesh: &TriMesh, u: &ConformalFactors, mu: &[MeshSample], nu: &[MeshSample]) -> f64 {
    use nesots::analysis::sw_energy;
    use nesots::sampler::Space;
    let nv = mesh.num_vertices();
    let mut total = 0.0;
    let mut count = 0;
    for k in 0..16 {
        let l = build_local_layout(mesh, u, k * nv / 16, 1.5).unwrap();
        let (Some(a), Some(b)) = (l.restrict(mu).measure(Space::Hyperbolic), l.restrict(nu).measure(Space::Hyperbolic)) else {
            continue;
        };
        total += sw_energy(&a, &b, 64, nesots::ot1d::Power::Two, k as u64).unwrap();
        count += 1;
    }
    total / count as f64
}

#[test]
fn wider_patches_end_with_lower_energy() {
    let mesh = generate::holed_slab(2, 8, 20).unwrap();
    let (u, _) = yamabe_flow(&mesh, &YamabeOptions::default()).unwrap();
    let cfg = HyperbolicConfig::new(1024, 8192);
    let nu = sample_faces(&mesh, &Density::Uniform, 8192, &mut pipeline::target_rng(cfg.sampler.seed)).unwrap();
    let run = |eps: f64| {
        let mut c = cfg.clone().with_eps(eps);
        c.trace_patches = 0;
        let (mu, _) = sample_mesh_hyperbolic(&mesh, &u, &Density::Uniform, &c).unwrap();
        common_patch_energy(&mesh, &u, &mu, &nu)
    };
    let (narrow, wide) = (run(1.01), run(2.6));
    assert!(wide < narrow, "eps 2.6: {wide:e}, eps 1.01: {narrow:e}");
}
