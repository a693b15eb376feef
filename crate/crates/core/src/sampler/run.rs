//! The sliced optimizer on `S^d`, `H^d` and `P^d`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Pooling, RunTrace, SamplerConfig};
use super::measure::{mat_vec, subsample, DiscreteMeasure, Space};
use super::weiszfeld::geometric_median_into;
use crate::error::{Error, Result};
use crate::manifold::{hyperbolic, sphere};
use crate::ot1d::{self, Assignment};
use crate::slicing::{self, HyperSlice, SphereSlice, ORTHOGONAL_TOL};

/// Slice redraws allowed when a point is orthogonal to the slice.
const MAX_SLICE_RETRIES: usize = 32;

/// Optional run hooks.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Row-major `(d+1) x (d+1)` matrix applied to every drawn slice.
    pub slice_frame: Option<Vec<f64>>,
}

/// SplitMix64 finalizer used to derive independent streams.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream for slice `l` of iteration `j`.
pub fn slice_rng(seed: u64, j: usize, l: usize) -> ChaCha8Rng {
    let s = mix_seed(mix_seed(mix_seed(seed) ^ j as u64) ^ (l as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    ChaCha8Rng::seed_from_u64(s)
}

/// Stream used for the initial subsample.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0x5EED_0F1A_17A1_0000))
}

/// `mu^(0)`: the first `n` atoms of a uniform subsample of `nu`.
pub fn initial_subsample(nu: &DiscreteMeasure, cfg: &SamplerConfig) -> Result<DiscreteMeasure> {
    subsample(nu, cfg.n, &mut init_rng(cfg.seed))
}

/// Runs `K` iterations from `mu^(0) = subsample(nu, n)`.
pub fn nesots_run(nu: &DiscreteMeasure, cfg: &SamplerConfig) -> Result<(DiscreteMeasure, RunTrace)> {
    if nu.space() == Space::Projective {
        return Err(Error::InvalidConfig("use projective_run for projective targets".into()));
    }
    cfg.validate()?;
    let mu0 = initial_subsample(nu, cfg)?;
    nesots_run_from(mu0, nu, cfg, &RunOptions::default())
}

/// Runs `K` iterations from the given initial samples; `cfg.n` and `cfg.m` are
/// taken from the measures.
pub fn nesots_run_from(
    mu0: DiscreteMeasure,
    nu: &DiscreteMeasure,
    cfg: &SamplerConfig,
    opts: &RunOptions,
) -> Result<(DiscreteMeasure, RunTrace)> {
    check_pair(&mu0, nu, 1)?;
    run(mu0, nu, cfg, opts, false)
}

/// Projective variant: `n` representatives whose antipodes join every slice
/// matching against `2n` target atoms.
pub fn projective_run(nu: &DiscreteMeasure, cfg: &SamplerConfig) -> Result<(DiscreteMeasure, RunTrace)> {
    cfg.validate_projective()?;
    let nu = nu.clone().with_space(Space::Projective)?;
    let mu0 = initial_subsample(&nu, cfg)?;
    projective_run_from(mu0, &nu, cfg, &RunOptions::default())
}

pub fn projective_run_from(
    mu0: DiscreteMeasure,
    nu: &DiscreteMeasure,
    cfg: &SamplerConfig,
    opts: &RunOptions,
) -> Result<(DiscreteMeasure, RunTrace)> {
    let mu0 = mu0.with_space(Space::Projective)?;
    let nu = nu.clone().with_space(Space::Projective)?;
    check_pair(&mu0, &nu, 2)?;
    run(mu0, &nu, cfg, opts, true)
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure, copies: usize) -> Result<()> {
    let spherical = |s: Space| s != Space::Hyperbolic;
    if spherical(mu.space()) != spherical(nu.space()) {
        return Err(Error::InvalidConfig("samples and target live in different spaces".into()));
    }
    if mu.ambient_dim() != nu.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: nu.ambient_dim(), got: mu.ambient_dim() });
    }
    if copies * mu.len() > nu.len() {
        return Err(Error::InvalidConfig(format!(
            "{} matched samples exceed the {} target atoms",
            copies * mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

enum Slice {
    Sphere(SphereSlice),
    Hyper(HyperSlice),
}

struct Block {
    /// `n x (d+1)` directions, followed by the negated antipodal directions in
    /// projective mode.
    dirs: Vec<f64>,
    /// Mean optimal 1D cost per matched atom.
    cost: f64,
}

struct Ctx<'a> {
    mu: &'a [f64],
    nu: &'a DiscreteMeasure,
    dim: usize,
    n: usize,
    hyper: bool,
    antipodal: bool,
    cfg: &'a SamplerConfig,
    frame: Option<&'a [f64]>,
}

impl Ctx<'_> {
    fn draw_slice(&self, rng: &mut ChaCha8Rng) -> Slice {
        let d = self.dim - 1;
        if self.hyper {
            let mut s = slicing::sample_slice_hyper(rng, d);
            if let Some(r) = self.frame {
                s.dvec = mat_vec(r, &s.dvec);
            }
            Slice::Hyper(s)
        } else {
            let mut s = slicing::sample_slice_sphere(rng, d);
            if let Some(r) = self.frame {
                s.e1 = mat_vec(r, &s.e1);
                s.e2 = mat_vec(r, &s.e2);
            }
            Slice::Sphere(s)
        }
    }

    /// Slice coordinates of `pts`, `None` if one of them is orthogonal to a
    /// spherical slice.
    fn coords<'p>(&self, slice: &Slice, pts: impl Iterator<Item = &'p [f64]>, out: &mut Vec<f64>) -> bool {
        out.clear();
        match slice {
            Slice::Sphere(s) => {
                for x in pts {
                    let (a, b) = s.plane_coords(x);
                    if a.hypot(b) < ORTHOGONAL_TOL {
                        return false;
                    }
                    out.push(slicing::circle_coord(a, b));
                }
            }
            Slice::Hyper(s) => out.extend(pts.map(|x| s.coord_of(x))),
        }
        true
    }

    fn slice_block(&self, j: usize, l: usize) -> Result<Block> {
        let mut rng = slice_rng(self.cfg.seed, j, l);
        let copies = if self.antipodal { 2 } else { 1 };
        let k = copies * self.n;
        let idx = rand::seq::index::sample(&mut rng, self.nu.len(), k).into_vec();
        let mut src = Vec::with_capacity(k);
        let mut dst = Vec::with_capacity(k);
        for _ in 0..MAX_SLICE_RETRIES {
            let slice = self.draw_slice(&mut rng);
            if !self.coords(&slice, self.mu.chunks_exact(self.dim), &mut src) {
                continue;
            }
            if self.antipodal {
                for i in 0..self.n {
                    let t = src[i] + 0.5;
                    src.push(if t >= 1.0 { t - 1.0 } else { t });
                }
            }
            if !self.coords(&slice, idx.iter().map(|&i| self.nu.atom(i)), &mut dst) {
                continue;
            }
            let (asg, cost) = if self.hyper {
                let a = ot1d::solve_line(&src, &dst)?;
                let c = a.line_cost(&src, &dst, self.cfg.p);
                (a, c)
            } else {
                let a = ot1d::solve_circle(&src, &dst, self.cfg.p)?;
                let c = a.circle_cost(&src, &dst, self.cfg.p);
                (a, c)
            };
            let dirs = self.directions(&slice, &asg, &idx);
            return Ok(Block { dirs, cost: cost / k as f64 });
        }
        Err(Error::NoConvergence(format!(
            "no usable slice after {MAX_SLICE_RETRIES} draws"
        )))
    }

    fn directions(&self, slice: &Slice, asg: &Assignment, idx: &[usize]) -> Vec<f64> {
        let dim = self.dim;
        let copies = if self.antipodal { 2 } else { 1 };
        let mut dirs = vec![0.0; copies * self.n * dim];
        let mut px = vec![0.0; dim];
        let mut ty = vec![0.0; dim];
        let mut gx = vec![0.0; dim];
        let mut xneg = vec![0.0; dim];
        for c in 0..copies {
            for i in 0..self.n {
                let row = c * self.n + i;
                let mut x = &self.mu[i * dim..(i + 1) * dim];
                if c == 1 {
                    for (o, v) in xneg.iter_mut().zip(x) {
                        *o = -v;
                    }
                    x = &xneg;
                }
                let y = self.nu.atom(idx[asg.perm[row]]);
                let out = &mut dirs[row * dim..(row + 1) * dim];
                match slice {
                    Slice::Sphere(s) => {
                        // both projections were checked against ORTHOGONAL_TOL
                        let _ = s.project_into(x, &mut px);
                        let _ = s.project_into(y, &mut ty);
                        sphere::rotate_into(&px, &ty, x, &mut gx);
                        if sphere::log_into(x, &gx, out).is_err() {
                            out.iter_mut().for_each(|o| *o = 0.0);
                        }
                    }
                    Slice::Hyper(s) => {
                        s.project_into(x, &mut px);
                        s.project_into(y, &mut ty);
                        hyperbolic::rotate_into(&px, &ty, x, &mut gx);
                        hyperbolic::log_into(x, &gx, out);
                    }
                }
                if c == 1 {
                    out.iter_mut().for_each(|o| *o = -*o);
                }
            }
        }
        dirs
    }
}

/// Fixed probe slices with the target's sorted coordinates on each.
struct TraceProbes {
    slices: Vec<Slice>,
    nu_sorted: Vec<Vec<f64>>,
}

fn slice_coord(slice: &Slice, x: &[f64]) -> f64 {
    match slice {
        Slice::Sphere(s) => {
            let (a, b) = s.plane_coords(x);
            slicing::circle_coord(a, b)
        }
        Slice::Hyper(s) => s.coord_of(x),
    }
}

impl TraceProbes {
    fn new(ctx: &Ctx<'_>, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(ctx.cfg.seed ^ 0x7ACE_0000_0000_0001));
        let slices: Vec<Slice> = (0..count).map(|_| ctx.draw_slice(&mut rng)).collect();
        let nu_sorted = slices
            .iter()
            .map(|s| {
                let mut v: Vec<f64> = ctx.nu.iter().map(|y| slice_coord(s, y)).collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        Self { slices, nu_sorted }
    }

    fn energy(&self, mu: &[f64], dim: usize, antipodal: bool, p: ot1d::Power) -> f64 {
        let total: f64 = self
            .slices
            .par_iter()
            .zip(&self.nu_sorted)
            .map(|(s, ys)| {
                let mut xs: Vec<f64> = mu.chunks_exact(dim).map(|x| slice_coord(s, x)).collect();
                if antipodal {
                    let k = xs.len();
                    for i in 0..k {
                        let t = xs[i] + 0.5;
                        xs.push(if t >= 1.0 { t - 1.0 } else { t });
                    }
                }
                xs.sort_by(f64::total_cmp);
                match s {
                    Slice::Sphere(_) => ot1d::wasserstein_circle_sorted(&xs, ys, p),
                    Slice::Hyper(_) => ot1d::wasserstein_line_sorted(&xs, ys, p),
                }
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        total / self.slices.len() as f64
    }
}

fn run(
    mu0: DiscreteMeasure,
    nu: &DiscreteMeasure,
    cfg: &SamplerConfig,
    opts: &RunOptions,
    antipodal: bool,
) -> Result<(DiscreteMeasure, RunTrace)> {
    cfg.validate_loop()?;
    let dim = mu0.ambient_dim();
    if let Some(r) = &opts.slice_frame {
        if r.len() != dim * dim {
            return Err(Error::LengthMismatch(r.len(), dim * dim));
        }
    }
    let space = mu0.space();
    let hyper = space == Space::Hyperbolic;
    let n = mu0.len();
    let copies = if antipodal { 2 } else { 1 };
    let mut mu = mu0.into_flat();
    let mut trace = RunTrace::default();
    let probes = (cfg.trace_probes > 0).then(|| {
        let ctx = Ctx {
            mu: &mu,
            nu,
            dim,
            n,
            hyper,
            antipodal,
            cfg,
            frame: opts.slice_frame.as_deref(),
        };
        TraceProbes::new(&ctx, cfg.trace_probes)
    });

    for j in 0..cfg.iterations {
        let start = Instant::now();
        let ctx = Ctx {
            mu: &mu,
            nu,
            dim,
            n,
            hyper,
            antipodal,
            cfg,
            frame: opts.slice_frame.as_deref(),
        };
        let blocks: Vec<Block> = (0..cfg.batch)
            .into_par_iter()
            .map(|l| ctx.slice_block(j, l))
            .collect::<Result<_>>()?;
        let gamma = cfg.step(j);
        let next: Vec<f64> = mu
            .par_chunks_exact(dim)
            .enumerate()
            .flat_map_iter(|(i, x)| {
                let mut pool = Vec::with_capacity(cfg.batch * copies * dim);
                for b in &blocks {
                    for c in 0..copies {
                        let row = c * n + i;
                        pool.extend_from_slice(&b.dirs[row * dim..(row + 1) * dim]);
                    }
                }
                let mut d = vec![0.0; dim];
                match cfg.pooling {
                    Pooling::Mean => {
                        let k = (pool.len() / dim) as f64;
                        for v in pool.chunks_exact(dim) {
                            for (a, b) in d.iter_mut().zip(v) {
                                *a += b;
                            }
                        }
                        d.iter_mut().for_each(|a| *a /= k);
                    }
                    Pooling::GeometricMedian => {
                        geometric_median_into(&pool, dim, cfg.tau, cfg.weiszfeld_max_iter, &mut d);
                    }
                }
                d.iter_mut().for_each(|a| *a *= gamma);
                let mut out = vec![0.0; dim];
                if hyper {
                    hyperbolic::project_tangent(x, &mut d);
                    hyperbolic::exp_into(x, &d, &mut out);
                } else {
                    sphere::project_tangent(x, &mut d);
                    sphere::exp_into(x, &d, &mut out);
                }
                out
            })
            .collect();
        mu = next;
        trace.batch_cost.push(blocks.iter().map(|b| b.cost).sum::<f64>() / blocks.len() as f64);
        if let Some(pr) = &probes {
            trace.energy.push(pr.energy(&mu, dim, antipodal, cfg.p));
        }
        trace.seconds.push(start.elapsed().as_secs_f64());
    }
    Ok((DiscreteMeasure::from_flat_raw(space, dim, mu), trace))
}
