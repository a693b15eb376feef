//! Subcommand bodies.

use std::hash::{Hash, Hasher};
use std::path::Path;

use anyhow::{Context, Result};
use nesots::analysis::{mesh_pcf, pair_correlation, sphere_pcf, sphere_power_spectrum, sw_energy, PcfReport, Reference};
use nesots::manifold::{hyperbolic, sphere};
use nesots::mesh::io::{parse_samples_csv, parse_scalar_csv, read_mesh_arrays};
use nesots::mesh::yamabe::max_defect;
use nesots::mesh::{
    embed_sphere_fallback, load_mesh, samples_csv, sample_mesh_hyperbolic, sample_mesh_spherical, yamabe_flow,
    ConformalFactors, Density, HyperbolicConfig, Layout, MeshSample, TriMesh, YamabeOptions,
};
use nesots::ot1d::Power;
use nesots::sampler::projective::{affine_line_from_atom, make_affine_line_measure, quaternion_to_matrix};
use nesots::sampler::{
    default_decay, mix_seed, nesots_run, projective_run, targets, DiscreteMeasure, Pooling, RunTrace, SamplerConfig,
    Space,
};
use nesots::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::io::{self, OutDir};
use crate::{AnalyzeArgs, DensityOn, HyperArgs, MeshArgs, OptArgs, PoolingArg, ProjArgs, ProjMode, SphereArgs, SphereTarget};

fn power(p: u8) -> Power {
    if p == 1 {
        Power::One
    } else {
        Power::Two
    }
}

/// Sampler settings from the flags; `k` fills in a missing `--K`.
fn sampler_config(o: &OptArgs, m: usize, k: usize) -> SamplerConfig {
    let mut c = SamplerConfig::new(o.n, m).with_iterations(o.k.unwrap_or(k)).with_batch(o.l).with_seed(o.seed);
    if let Some(d) = o.decay {
        c.decay = d;
    }
    c.gamma0 = o.gamma0;
    c.tau = o.tau;
    c.p = power(o.p);
    c.pooling = match o.pooling {
        PoolingArg::Mean => Pooling::Mean,
        PoolingArg::Median => Pooling::GeometricMedian,
    };
    c.trace_probes = o.trace_probes;
    c
}

fn target_rng(o: &OptArgs) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(o.target_seed.unwrap_or(o.seed) ^ 0x7A26_E7F0_C11D_0001))
}

/// Built-in target size: `--m`, else four times `n`.
fn builtin_m(o: &OptArgs) -> usize {
    o.m.unwrap_or(4 * o.n)
}

fn check_file_m(o: &OptArgs, got: usize) -> Result<()> {
    match o.m {
        Some(m) if m != got => Err(Error::InvalidConfig(format!("--m {m} but the target file holds {got} atoms")).into()),
        _ => Ok(()),
    }
}

fn argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn manifest(command: &str, cfg: &SamplerConfig, extra: Value) -> Value {
    let mut v = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "argv": argv(),
        "seed": cfg.seed,
        "config": cfg,
    });
    if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn write_run(out: &mut OutDir, mu: &DiscreteMeasure, trace: &RunTrace) -> Result<()> {
    out.write("points.csv", &io::points_csv(mu))?;
    if let Some(p) = io::as3(mu) {
        out.write("points.ply", &io::ply(&p))?;
    }
    out.write("trace.csv", &io::trace_csv(&trace.energy, &trace.batch_cost))
}

fn trace_summary(trace: &RunTrace) -> Value {
    json!({ "iterations": trace.batch_cost.len(), "final_energy": trace.energy.last() })
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{v}` in `{s}`")).into()))
        .collect()
}

pub fn sample_sphere(a: &SphereArgs) -> Result<()> {
    let o = &a.opt;
    let (nu, target) = match &a.target {
        Some(p) => {
            let nu = io::read_points(p, Some(Space::Sphere))?;
            check_file_m(o, nu.len())?;
            (nu, json!({ "file": p }))
        }
        None => {
            let m = builtin_m(o);
            let rng = &mut target_rng(o);
            let s2 = || -> Result<()> {
                if a.dim != 2 {
                    return Err(Error::InvalidConfig(format!("{:?} target needs --dim 2", a.builtin)).into());
                }
                Ok(())
            };
            let nu = match a.builtin {
                SphereTarget::Uniform => targets::uniform_sphere(rng, a.dim, m)?,
                SphereTarget::Stratified => {
                    s2()?;
                    targets::stratified_sphere2(rng, m)?
                }
                SphereTarget::Mixture => {
                    s2()?;
                    targets::vmf_mixture(rng, &targets::default_mixture(), m)?
                }
                SphereTarget::Cap => {
                    let c = parse_vec(&a.cap_center)?;
                    if c.len() != a.dim + 1 {
                        return Err(Error::DimensionMismatch { expected: a.dim + 1, got: c.len() }.into());
                    }
                    targets::uniform_cap(rng, &c, a.cap_angle, m)?
                }
            };
            let builtin = format!("{:?}", a.builtin).to_lowercase();
            (nu, json!({ "builtin": builtin, "dim": a.dim, "seed": o.target_seed.unwrap_or(o.seed) }))
        }
    };
    let cfg = sampler_config(o, nu.len(), 300);
    let (mu, trace) = nesots_run(&nu, &cfg)?;
    let mut out = OutDir::create(&o.out)?;
    write_run(&mut out, &mu, &trace)?;
    out.finish(&manifest("sample-sphere", &cfg, json!({ "space": "sphere", "target": target, "trace": trace_summary(&trace) })))
}

pub fn sample_hyperbolic(a: &HyperArgs) -> Result<()> {
    let o = &a.opt;
    let (nu, target) = match &a.target {
        Some(p) => {
            let nu = io::read_points(p, Some(Space::Hyperbolic))?;
            check_file_m(o, nu.len())?;
            (nu, json!({ "file": p }))
        }
        None => (
            targets::uniform_hyper_ball(&mut target_rng(o), a.dim, a.tmax, builtin_m(o))?,
            json!({ "builtin": "ball", "dim": a.dim, "tmax": a.tmax, "seed": o.target_seed.unwrap_or(o.seed) }),
        ),
    };
    let cfg = sampler_config(o, nu.len(), 300);
    let (mu, trace) = nesots_run(&nu, &cfg)?;
    let mut out = OutDir::create(&o.out)?;
    write_run(&mut out, &mu, &trace)?;
    out.finish(&manifest(
        "sample-hyperbolic",
        &cfg,
        json!({ "space": "hyperbolic", "target": target, "trace": trace_summary(&trace) }),
    ))
}

/// Uniform lines meeting the unit disk: normal angle and offset uniform.
fn builtin_lines(rng: &mut ChaCha8Rng, m: usize) -> Vec<[f64; 3]> {
    use rand::Rng;
    (0..m)
        .map(|_| {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let c = rng.random_range(-1.0..1.0);
            [t.cos(), t.sin(), c]
        })
        .collect()
}

pub fn sample_projective(a: &ProjArgs) -> Result<()> {
    let o = &a.opt;
    let rng = &mut target_rng(o);
    let (base, target) = match (a.mode, &a.target) {
        (ProjMode::Lines, Some(p)) => {
            let (rows, _) = io::read_rows(p)?;
            let lines = rows
                .iter()
                .map(|r| {
                    <[f64; 3]>::try_from(r.as_slice()).map_err(|_| Error::DimensionMismatch { expected: 3, got: r.len() })
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (make_affine_line_measure(&lines)?, json!({ "file": p }))
        }
        (ProjMode::Lines, None) => (
            make_affine_line_measure(&builtin_lines(rng, builtin_m(o)))?,
            json!({ "builtin": "disk-lines", "seed": o.target_seed.unwrap_or(o.seed) }),
        ),
        (mode, Some(p)) => {
            let nu = io::read_points(p, Some(Space::Sphere))?;
            if mode == ProjMode::Quaternion && nu.ambient_dim() != 4 {
                return Err(Error::DimensionMismatch { expected: 4, got: nu.ambient_dim() }.into());
            }
            (nu, json!({ "file": p }))
        }
        (mode, None) => {
            let d = if mode == ProjMode::Quaternion { 3 } else { a.dim };
            (
                targets::uniform_sphere(rng, d, builtin_m(o))?,
                json!({ "builtin": "uniform", "dim": d, "seed": o.target_seed.unwrap_or(o.seed) }),
            )
        }
    };
    if a.target.is_some() {
        check_file_m(o, base.len())?;
    }
    let nu = base.with_space(Space::Sphere)?.symmetrized()?;
    let cfg = sampler_config(o, nu.len(), 300);
    let (mu, trace) = projective_run(&nu, &cfg)?;

    let mut out = OutDir::create(&o.out)?;
    write_run(&mut out, &mu, &trace)?;
    let anti = mu.iter().map(|x| x.iter().map(|v| -v).collect());
    out.write("antipodes.csv", &io::rows_csv(Space::Projective, mu.manifold_dim(), anti))?;
    match a.mode {
        ProjMode::Quaternion => {
            let mut s = String::from("r00,r01,r02,r10,r11,r12,r20,r21,r22\n");
            for q in mu.iter() {
                let r = quaternion_to_matrix(&[q[0], q[1], q[2], q[3]]);
                let row: Vec<String> = r.iter().flatten().map(|v| format!("{v:.17e}")).collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            out.write("rotations.csv", &s)?;
        }
        ProjMode::Lines => {
            let mut s = String::from("a,b,c\n");
            for x in mu.iter() {
                let l = affine_line_from_atom(x)?;
                s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", l[0], l[1], l[2]));
            }
            out.write("lines.csv", &s)?;
        }
        ProjMode::Points => {}
    }
    let mode = format!("{:?}", a.mode).to_lowercase();
    out.finish(&manifest(
        "sample-projective",
        &cfg,
        json!({ "space": "projective", "mode": mode, "target": target, "trace": trace_summary(&trace) }),
    ))
}

fn load_density(a: &MeshArgs, mesh: &TriMesh) -> Result<Density> {
    let Some(p) = &a.density else { return Ok(Density::Uniform) };
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(match a.density_on {
        DensityOn::Vertex => Density::PerVertex(parse_scalar_csv(&text, mesh.num_vertices())?),
        DensityOn::Face => Density::PerFace(parse_scalar_csv(&text, mesh.num_faces())?),
    })
}

fn mesh_fingerprint(mesh: &TriMesh) -> String {
    let mut h = std::hash::DefaultHasher::new();
    for v in mesh.vertices() {
        v.map(f64::to_bits).hash(&mut h);
    }
    mesh.faces().hash(&mut h);
    format!("{:016x}", h.finish())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct YamabeCache {
    fingerprint: String,
    factors: ConformalFactors,
}

/// Conformal factors from the cache when it matches the mesh, else from a
/// fresh flow (written back when a cache path is given).
fn conformal_factors(mesh: &TriMesh, cache: Option<&Path>) -> Result<ConformalFactors> {
    let fp = mesh_fingerprint(mesh);
    if let Some(p) = cache.filter(|p| p.exists()) {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let c: YamabeCache = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        if c.fingerprint != fp || c.factors.u.len() != mesh.num_vertices() {
            return Err(Error::InvalidConfig(format!("{} was computed for a different mesh", p.display())).into());
        }
        eprintln!("conformal factors loaded from {}", p.display());
        return Ok(c.factors);
    }
    let (u, rep) = yamabe_flow(mesh, &YamabeOptions::default())?;
    eprintln!("conformal flow converged in {} iterations", rep.iterations);
    if let Some(p) = cache {
        let c = YamabeCache { fingerprint: fp, factors: u.clone() };
        std::fs::write(p, serde_json::to_string(&c)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(u)
}

fn write_samples(out: &mut OutDir, s: &[MeshSample]) -> Result<()> {
    out.write("samples.csv", &samples_csv(s))?;
    let pts: Vec<[f64; 3]> = s.iter().map(|m| m.position).collect();
    out.write("samples.ply", &io::ply(&pts))
}

pub fn sample_mesh(a: &MeshArgs) -> Result<()> {
    let o = &a.opt;
    let mesh = load_mesh(&a.mesh).with_context(|| format!("loading {}", a.mesh.display()))?;
    let density = load_density(a, &mesh)?;
    let m = o.m.unwrap_or(8 * o.n);
    let genus = mesh.genus();
    let mesh_info = json!({
        "path": a.mesh, "vertices": mesh.num_vertices(), "faces": mesh.num_faces(), "genus": genus,
        "density": a.density, "density_on": format!("{:?}", a.density_on).to_lowercase(),
    });
    match genus {
        0 => {
            let (layout, embed) = match (&a.layout, a.fallback_embed) {
                (Some(p), _) => {
                    let (v, f) = read_mesh_arrays(p)?;
                    if f != mesh.faces() {
                        return Err(Error::Mesh("layout faces differ from the mesh faces".into()).into());
                    }
                    (Layout::spherical(&mesh, &v)?, json!({ "layout": p }))
                }
                (None, true) => {
                    let (l, rep) = embed_sphere_fallback(&mesh, a.embed_iters)?;
                    let json = json!({ "fallback_iters": a.embed_iters, "flips": rep.flips.last(),
                        "distortion": rep.distortion.last() });
                    (l, json)
                }
                (None, false) => {
                    return Err(Error::InvalidConfig("genus-0 mesh needs --layout or --fallback-embed".into()).into())
                }
            };
            let cfg = sampler_config(o, m, 300);
            let (s, trace) = sample_mesh_spherical(&mesh, &layout, &density, &cfg)?;
            let mut out = OutDir::create(&o.out)?;
            write_samples(&mut out, &s)?;
            out.write("trace.csv", &io::trace_csv(&trace.energy, &trace.batch_cost))?;
            out.finish(&manifest(
                "sample-mesh",
                &cfg,
                json!({ "path": "spherical", "mesh": mesh_info, "embedding": embed, "trace": trace_summary(&trace) }),
            ))
        }
        g if g >= 2 => {
            let u = conformal_factors(&mesh, a.yamabe_cache.as_deref())?;
            let mut cfg = HyperbolicConfig::new(o.n, m).with_rounds(a.rounds).with_eps(a.eps);
            cfg.sampler = sampler_config(o, m, 10);
            if o.decay.is_none() {
                cfg.sampler.decay = default_decay(a.rounds * cfg.sampler.iterations);
            }
            cfg.sampler.trace_probes = 0;
            cfg.trace_patches = a.trace_patches;
            cfg.trace_probes = a.patch_probes;
            cfg.stratified_target = a.stratified_target;
            let (s, rep) = sample_mesh_hyperbolic(&mesh, &u, &density, &cfg)?;
            let mut out = OutDir::create(&o.out)?;
            write_samples(&mut out, &s)?;
            let mut t = String::from("round,energy\n");
            for (r, e) in rep.energy.iter().enumerate() {
                t.push_str(&format!("{r},{e:.17e}\n"));
            }
            out.write("trace.csv", &t)?;
            let sizes: Vec<usize> = rep.rounds.iter().map(|r| r.mu).collect();
            let patches = json!({
                "rounds": rep.rounds.len(),
                "optimized": rep.rounds.iter().filter(|r| r.optimized).count(),
                "mean_samples": rep.mean_patch_samples(),
                "min_samples": sizes.iter().min(),
                "max_samples": sizes.iter().max(),
                "mean_faces": rep.rounds.iter().map(|r| r.faces as f64).sum::<f64>() / rep.rounds.len().max(1) as f64,
                "missed": rep.rounds.iter().map(|r| r.missed).sum::<usize>(),
                "min_visits": rep.visits.iter().min(),
                "max_visits": rep.visits.iter().max(),
            });
            let mut man = manifest(
                "sample-mesh",
                &cfg.sampler,
                json!({ "path": "hyperbolic", "mesh": mesh_info, "patches": patches,
                    "yamabe_defect": max_defect(&mesh, &u.u)?, "final_energy": rep.energy.last() }),
            );
            man["hyperbolic"] = serde_json::to_value(&cfg)?;
            out.finish(&man)
        }
        g => Err(Error::UnsupportedGenus(g))
            .context("genus 1 needs a flat metric, which is not supported; meshes must have genus 0 or at least 2"),
    }
}

fn dist_fn(space: Space) -> fn(&[f64], &[f64]) -> f64 {
    match space {
        Space::Hyperbolic => hyperbolic::dist_raw,
        _ => sphere::dist_raw,
    }
}

pub fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let mut out = OutDir::create(&a.out)?;
    let mut man = json!({ "command": "analyze", "version": env!("CARGO_PKG_VERSION"), "argv": argv() });
    if let Some(sp) = &a.samples {
        let mp = a.mesh.as_ref().ok_or_else(|| Error::InvalidConfig("--samples needs --mesh".into()))?;
        let mesh = load_mesh(mp)?;
        let text = std::fs::read_to_string(sp).with_context(|| format!("reading {}", sp.display()))?;
        let s = parse_samples_csv(&text, &mesh)?;
        if s.is_empty() {
            return Err(Error::Empty("no samples in input file").into());
        }
        let rmax = a.rmax.unwrap_or(4.0 * (mesh.total_area() / s.len() as f64).sqrt());
        let pcf = mesh_pcf(&mesh, &s, a.pcf_reference, rmax, a.bins, a.seed)?;
        out.write("pcf.csv", &pcf.to_csv())?;
        man["n"] = json!(s.len());
        man["pcf"] = pcf_summary(&pcf, rmax);
        return out.finish(&man);
    }
    let pp = a.points.as_ref().ok_or_else(|| Error::InvalidConfig("give --points or --samples".into()))?;
    let mu = io::read_points(pp, None)?;
    man["n"] = json!(mu.len());
    man["space"] = json!(mu.space().name());
    // projective sets are analyzed together with their antipodes
    let pts = match mu.space() {
        Space::Projective => mu.clone().with_space(Space::Sphere)?.symmetrized()?,
        _ => mu.clone(),
    };
    let nu = match &a.reference {
        Some(r) => Some(io::read_points(r, Some(mu.space()))?),
        None => None,
    };
    if pts.space() == Space::Sphere {
        if let Some(p3) = io::as3(&pts) {
            let spec = sphere_power_spectrum(&p3, a.lmax)?;
            out.write("spectrum.csv", &spec.to_csv())?;
            man["spectrum"] = json!({ "lmax": a.lmax, "band_mean_1_10": spec.band_mean(1, 10.min(a.lmax)) });
        }
        let rmax = a.rmax.unwrap_or(std::f64::consts::PI);
        let pcf = sphere_pcf(&pts.rows(), rmax, a.bins)?;
        out.write("pcf.csv", &pcf.to_csv())?;
        man["pcf"] = pcf_summary(&pcf, rmax);
    } else if let Some(nu) = &nu {
        // hyperbolic pcf against the pair distances of the reference set
        let d = dist_fn(Space::Hyperbolic);
        let refd: Vec<f64> = (0..nu.len()).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| d(nu.atom(i), nu.atom(j))).collect();
        let rmax = a.rmax.unwrap_or_else(|| refd.iter().copied().fold(0.0, f64::max));
        let pcf = pair_correlation(pts.len(), |i, j| d(pts.atom(i), pts.atom(j)), &Reference::Samples(refd), rmax, a.bins)?;
        out.write("pcf.csv", &pcf.to_csv())?;
        man["pcf"] = pcf_summary(&pcf, rmax);
    }
    if let Some(nu) = &nu {
        man["sw_energy"] = json!({ "value": sw_energy(&mu, nu, a.probes, power(a.p), a.seed)?, "probes": a.probes, "p": a.p, "seed": a.seed });
    }
    out.finish(&man)
}

fn pcf_summary(pcf: &PcfReport, rmax: f64) -> Value {
    json!({ "bins": pcf.g.len(), "rmax": rmax, "first_bin": pcf.g.first() })
}
