//! Blue-noise sampling of meshes through a spherical layout (genus 0) or
//! through local hyperbolic patches of a Yamabe metric (genus >= 2).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layout::{build_local_layout, Layout, LayoutKind};
use super::yamabe::ConformalFactors;
use super::sample::sample_faces_stratified;
use super::{sample_faces, Density, MeshSample, TriMesh};
use crate::analysis::probe_rng;
use crate::error::{Error, Result};
use crate::linalg::{self, det3};
use crate::ot1d::{self, Power};
use crate::slicing::{self, HyperSlice};
use crate::sampler::{
    default_decay, init_rng, mix_seed, nesots_run_from, DiscreteMeasure, RunOptions, RunTrace, SamplerConfig, Space,
};

const TARGET_TAG: u64 = 0x7A26_E7F0_0000_0002;

/// Stream used to draw the target samples `nu` on the mesh.
pub fn target_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed ^ TARGET_TAG))
}

/// `m` target samples and the indices of the `n` initial samples among them.
fn draw_targets(mesh: &TriMesh, density: &Density, cfg: &SamplerConfig, strata: bool) -> Result<(Vec<MeshSample>, Vec<usize>)> {
    cfg.validate()?;
    let rng = &mut target_rng(cfg.seed);
    let nu = if strata {
        sample_faces_stratified(mesh, density, cfg.m, rng)?
    } else {
        sample_faces(mesh, density, cfg.m, rng)?
    };
    let idx = rand::seq::index::sample(&mut init_rng(cfg.seed), cfg.m, cfg.n).into_vec();
    Ok((nu, idx))
}

/// Samples a genus-0 mesh through a spherical layout with the same
/// connectivity. Points whose ray misses the layout keep their initial
/// position; points mapped onto a face of zero density are replaced by the
/// nearest target sample.
pub fn sample_mesh_spherical(
    mesh: &TriMesh,
    layout: &Layout,
    density: &Density,
    cfg: &SamplerConfig,
) -> Result<(Vec<MeshSample>, RunTrace)> {
    if mesh.genus() != 0 {
        return Err(Error::UnsupportedGenus(mesh.genus()));
    }
    if layout.kind() != LayoutKind::Sphere || layout.num_faces() != mesh.num_faces() {
        return Err(Error::Mesh("spherical layout must cover every face of the mesh".into()));
    }
    let (nu, idx) = draw_targets(mesh, density, cfg, false)?;
    let nu_g = layout.restrict(&nu).measure(Space::Sphere).ok_or(Error::Empty("target"))?;
    let mu0 = nu_g.select(&idx)?;
    let (mu, trace) = nesots_run_from(mu0, &nu_g, cfg, &RunOptions::default())?;
    let pts: Vec<[f64; 3]> = mu.iter().map(linalg::to3).collect();
    let mapped = layout.map_to_mesh(mesh, &pts);
    let weight = density.face_weights(mesh)?;
    let out = mapped
        .into_iter()
        .zip(&idx)
        .zip(&pts)
        .map(|((m, &i), p)| match m {
            Some(s) if weight[s.face] > 0.0 => s,
            // pushed past the edge of the support: nearest target atom
            Some(_) => nu[nearest(&nu_g, p)],
            None => nu[i],
        })
        .collect();
    Ok((out, trace))
}

fn nearest(nu: &DiscreteMeasure, p: &[f64; 3]) -> usize {
    (0..nu.len())
        .min_by(|&a, &b| linalg::dist(nu.atom(a), p).total_cmp(&linalg::dist(nu.atom(b), p)))
        .unwrap_or(0)
}

/// Per-iteration diagnostics of [`embed_sphere_fallback`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    /// Faces with negative spherical orientation, before smoothing and after
    /// every iteration.
    pub flips: Vec<usize>,
    /// Longest over shortest layout edge, per entry of `flips`. Uniform
    /// smoothing evens out the layout rather than matching mesh lengths.
    pub distortion: Vec<f64>,
}

fn orientation(mesh: &TriMesh) -> f64 {
    if mesh.signed_volume() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn count_flips(mesh: &TriMesh, pos: &[[f64; 3]], sign: f64) -> usize {
    mesh.faces()
        .iter()
        .filter(|f| sign * det3(&pos[f[0]], &pos[f[1]], &pos[f[2]]) <= 0.0)
        .count()
}

fn distortion(mesh: &TriMesh, pos: &[[f64; 3]]) -> f64 {
    let (lo, hi) = mesh.edges().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &[a, b]| {
        let d = linalg::dist(&pos[a], &pos[b]);
        (lo.min(d), hi.max(d))
    });
    hi / lo
}

/// Non-conformal spherical embedding of a genus-0 mesh: central projection
/// about the vertex centroid followed by `iters` steps of tangential
/// Laplacian smoothing with reprojection. Errors if faces remain flipped.
pub fn embed_sphere_fallback(mesh: &TriMesh, iters: usize) -> Result<(Layout, EmbedReport)> {
    if mesh.genus() != 0 {
        return Err(Error::UnsupportedGenus(mesh.genus()));
    }
    let c = mesh.centroid();
    let mut pos: Vec<[f64; 3]> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let mut p = [v[0] - c[0], v[1] - c[1], v[2] - c[2]];
            linalg::normalize(&mut p);
            p
        })
        .collect();
    if pos.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Mesh("a vertex coincides with the centroid".into()));
    }
    let sign = orientation(mesh);
    let mut rep = EmbedReport { flips: vec![count_flips(mesh, &pos, sign)], distortion: vec![distortion(mesh, &pos)] };
    for _ in 0..iters {
        let next: Vec<[f64; 3]> = (0..pos.len())
            .map(|v| {
                let nb = mesh.neighbors(v);
                let p = pos[v];
                let mut q = [0.0; 3];
                for &w in nb {
                    linalg::axpy(1.0 / nb.len() as f64, &pos[w], &mut q);
                }
                let mut d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                crate::manifold::sphere::project_tangent(&p, &mut d);
                let mut out = [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
                linalg::normalize(&mut out);
                out
            })
            .collect();
        pos = next;
        rep.flips.push(count_flips(mesh, &pos, sign));
        rep.distortion.push(distortion(mesh, &pos));
    }
    let left = *rep.flips.last().unwrap();
    if left > 0 {
        return Err(Error::Mesh(format!(
            "{left} faces remain flipped after {iters} smoothing iterations; supply a spherical conformal layout instead"
        )));
    }
    if sign < 0.0 {
        // keep the layout outward oriented for ray casting consistency
        pos.iter_mut().for_each(|p| p.iter_mut().for_each(|x| *x = -*x));
    }
    Ok((Layout::spherical(mesh, &pos)?, rep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicConfig {
    /// Inner settings; `iterations` is `K` per patch and the step after `r`
    /// rounds starts at `gamma0 * decay^(r K)`.
    pub sampler: SamplerConfig,
    /// Patch rounds `N`.
    pub rounds: usize,
    /// Time coordinate threshold of the layouts.
    pub eps: f64,
    /// Fixed patches used for the energy trace; 0 disables it.
    pub trace_patches: usize,
    pub trace_probes: usize,
    /// Draw the target with [`sample_faces_stratified`] instead of i.i.d.
    pub stratified_target: bool,
}

impl HyperbolicConfig {
    /// `N = 500`, `K = 10`, `L = 32`, `eps = 1.5`; steps decay to 5% over
    /// all `N K` inner iterations.
    pub fn new(n: usize, m: usize) -> Self {
        let mut sampler = SamplerConfig::new(n, m).with_iterations(10);
        sampler.trace_probes = 0;
        sampler.decay = default_decay(500 * 10);
        Self { sampler, rounds: 500, eps: 1.5, trace_patches: 16, trace_probes: 64, stratified_target: false }
    }

    /// Sets `N` and re-derives the decay.
    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self.sampler.decay = default_decay(rounds * self.sampler.iterations);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sampler.seed = seed;
        self
    }
}

/// What happened in one patch round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchRound {
    pub vertex: usize,
    /// Visit count of `vertex` when it was popped, and the minimum over all
    /// vertices at that time.
    pub visits_at_pop: u32,
    pub min_visits: u32,
    pub faces: usize,
    pub mu: usize,
    pub nu: usize,
    pub optimized: bool,
    /// Samples left in place because their ray missed the patch or hit a
    /// face outside the support of the density.
    pub missed: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    pub rounds: Vec<PatchRound>,
    /// Sliced energy between restricted samples and restricted target on
    /// fixed probe patches, averaged with weights equal to the number of
    /// samples on each patch; before the first round and after each.
    pub energy: Vec<f64>,
    pub visits: Vec<u32>,
}

impl HyperbolicReport {
    pub fn mean_patch_samples(&self) -> f64 {
        if self.rounds.is_empty() {
            return 0.0;
        }
        self.rounds.iter().map(|r| r.mu as f64).sum::<f64>() / self.rounds.len() as f64
    }

    /// Means over consecutive windows of `w` trace entries after the first.
    pub fn windowed_energy(&self, w: usize) -> Vec<f64> {
        RunTrace { energy: self.energy.iter().skip(1).copied().collect(), ..Default::default() }.windowed_means(w)
    }
}

/// A fixed patch with fixed slices and presorted target coordinates.
struct ProbePatch {
    layout: Layout,
    slices: Vec<HyperSlice>,
    nu_sorted: Vec<Vec<f64>>,
}

impl ProbePatch {
    fn new(layout: Layout, nu: &[MeshSample], probes: usize, seed: u64) -> Option<Self> {
        let nu = layout.restrict(nu);
        if nu.is_empty() {
            return None;
        }
        let mut rng = probe_rng(seed);
        let slices: Vec<HyperSlice> = (0..probes).map(|_| slicing::sample_slice_hyper(&mut rng, 2)).collect();
        let nu_sorted = slices.iter().map(|s| sorted_coords(s, &nu.points)).collect();
        Some(Self { layout, slices, nu_sorted })
    }

    /// Energy and number of samples on the patch.
    fn energy(&self, mu: &[MeshSample], p: Power) -> Option<(f64, usize)> {
        let mu = self.layout.restrict(mu);
        if mu.is_empty() {
            return None;
        }
        let total: f64 = self
            .slices
            .iter()
            .zip(&self.nu_sorted)
            .map(|(s, ys)| ot1d::wasserstein_line_sorted(&sorted_coords(s, &mu.points), ys, p))
            .sum();
        Some((total / self.slices.len() as f64, mu.len()))
    }
}

fn sorted_coords(s: &HyperSlice, pts: &[[f64; 3]]) -> Vec<f64> {
    let mut v: Vec<f64> = pts.iter().map(|x| s.coord_of(x)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Local hyperbolic patch optimization on a mesh of genus >= 2 whose
/// conformal factors `u` solve the Yamabe flow.
pub fn sample_mesh_hyperbolic(
    mesh: &TriMesh,
    u: &ConformalFactors,
    density: &Density,
    cfg: &HyperbolicConfig,
) -> Result<(Vec<MeshSample>, HyperbolicReport)> {
    if mesh.genus() < 2 {
        return Err(Error::UnsupportedGenus(mesh.genus()));
    }
    if u.u.len() != mesh.num_vertices() {
        return Err(Error::LengthMismatch(u.u.len(), mesh.num_vertices()));
    }
    if !(cfg.eps > 1.0) {
        return Err(Error::InvalidConfig(format!("eps = {} must exceed 1", cfg.eps)));
    }
    let sc = &cfg.sampler;
    let (nu, idx) = draw_targets(mesh, density, sc, cfg.stratified_target)?;
    let mut mu: Vec<MeshSample> = idx.iter().map(|&i| nu[i]).collect();
    let weight = density.face_weights(mesh)?;
    let nv = mesh.num_vertices();

    let probes: Vec<ProbePatch> = (0..cfg.trace_patches.min(nv))
        .filter_map(|k| {
            let v = k * nv / cfg.trace_patches.min(nv);
            let layout = build_local_layout(mesh, u, v, cfg.eps).ok()?;
            ProbePatch::new(layout, &nu, cfg.trace_probes.max(1), sc.seed ^ ((k as u64) << 32))
        })
        .collect();
    // sample-weighted so that small patches do not dominate
    let trace_energy = |mu: &[MeshSample]| -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (e, k) in probes.iter().filter_map(|p| p.energy(mu, sc.p)) {
            num += k as f64 * e;
            den += k as f64;
        }
        if den > 0.0 {
            num / den
        } else {
            f64::NAN
        }
    };

    let mut visits = vec![0u32; nv];
    let mut report = HyperbolicReport { rounds: Vec::with_capacity(cfg.rounds), energy: Vec::new(), visits: Vec::new() };
    if !probes.is_empty() {
        report.energy.push(trace_energy(&mu));
    }
    for r in 0..cfg.rounds {
        let start = Instant::now();
        let (v0, &at_pop) = visits.iter().enumerate().min_by_key(|(v, c)| (**c, *v)).unwrap();
        let min_visits = *visits.iter().min().unwrap();
        let layout = build_local_layout(mesh, u, v0, cfg.eps)?;
        for v in layout.placed_vertices() {
            visits[v] += 1;
        }
        let rmu = layout.restrict(&mu);
        let rnu = layout.restrict(&nu);
        let mut round = PatchRound {
            vertex: v0,
            visits_at_pop: at_pop,
            min_visits,
            faces: layout.num_faces(),
            mu: rmu.len(),
            nu: rnu.len(),
            optimized: false,
            missed: 0,
            seconds: 0.0,
        };
        if !rmu.is_empty() && rnu.len() >= rmu.len() {
            let mut inner = sc.clone();
            inner.n = rmu.len();
            inner.m = rnu.len();
            inner.trace_probes = 0;
            inner.gamma0 = sc.gamma0 * sc.decay.powf((r * sc.iterations) as f64);
            inner.seed = mix_seed(sc.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mu_p = rmu.measure(Space::Hyperbolic).unwrap();
            let nu_p = rnu.measure(Space::Hyperbolic).unwrap();
            let (out, _) = nesots_run_from(mu_p, &nu_p, &inner, &RunOptions::default())?;
            let pts: Vec<[f64; 3]> = out.iter().map(linalg::to3).collect();
            for (k, m) in layout.map_to_mesh(mesh, &pts).into_iter().enumerate() {
                match m {
                    Some(s) if weight[s.face] > 0.0 => mu[rmu.index[k]] = s,
                    _ => round.missed += 1,
                }
            }
            round.optimized = true;
        }
        round.seconds = start.elapsed().as_secs_f64();
        report.rounds.push(round);
        if !probes.is_empty() {
            report.energy.push(trace_energy(&mu));
        }
    }
    report.visits = visits;
    Ok((mu, report))
}
