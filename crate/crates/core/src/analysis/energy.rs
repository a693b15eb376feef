//! Monte Carlo sliced Wasserstein energy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ot1d::{self, Power};
use crate::sampler::{DiscreteMeasure, Space};
use crate::slicing;

/// Mixed into the seed so probe slices never coincide with optimizer slices.
const PROBE_TAG: u64 = 0x0B5E_27E5_11CE_5EED;

pub fn probe_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(crate::sampler::mix_seed(seed ^ PROBE_TAG))
}

/// Average over `probes` random slices of the 1D `W_p^p` between the projected
/// measures, in slice units (circle of length 1 on spherical spaces, geodesic
/// distance on `H^d`). Projective measures are compared together with their
/// antipodes.
pub fn sw_energy(mu: &DiscreteMeasure, nu: &DiscreteMeasure, probes: usize, p: Power, seed: u64) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::Empty("measure"));
    }
    if probes == 0 {
        return Err(Error::InvalidConfig("need at least one probe slice".into()));
    }
    if mu.ambient_dim() != nu.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: nu.ambient_dim(), got: mu.ambient_dim() });
    }
    let hyper = mu.space() == Space::Hyperbolic;
    if hyper != (nu.space() == Space::Hyperbolic) {
        return Err(Error::InvalidConfig("measures live in different spaces".into()));
    }
    let (mu, nu) = if mu.space() == Space::Projective || nu.space() == Space::Projective {
        (mu.symmetrized()?, nu.symmetrized()?)
    } else {
        (mu.clone(), nu.clone())
    };
    let d = mu.manifold_dim();
    let mut rng = probe_rng(seed);
    let mut total = 0.0;
    let mut xs = Vec::with_capacity(mu.len());
    let mut ys = Vec::with_capacity(nu.len());
    for _ in 0..probes {
        xs.clear();
        ys.clear();
        if hyper {
            let s = slicing::sample_slice_hyper(&mut rng, d);
            xs.extend(mu.iter().map(|x| s.coord_of(x)));
            ys.extend(nu.iter().map(|y| s.coord_of(y)));
            total += if xs.len() == ys.len() {
                ot1d::solve_line(&xs, &ys)?.line_cost(&xs, &ys, p) / xs.len() as f64
            } else {
                ot1d::wasserstein_line(&xs, &ys, p)?
            };
        } else {
            // orthogonal points are measure-zero; they sit at an arbitrary angle
            let s = slicing::sample_slice_sphere(&mut rng, d);
            let coord = |x: &[f64]| {
                let (a, b) = s.plane_coords(x);
                slicing::circle_coord(a, b)
            };
            xs.extend(mu.iter().map(coord));
            ys.extend(nu.iter().map(coord));
            total += if xs.len() == ys.len() {
                ot1d::solve_circle(&xs, &ys, p)?.circle_cost(&xs, &ys, p) / xs.len() as f64
            } else {
                ot1d::wasserstein_circle(&xs, &ys, p)?
            };
        }
    }
    Ok(total / probes as f64)
}
