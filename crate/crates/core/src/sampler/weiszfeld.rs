//! Smoothed Weiszfeld iteration for the geometric median.

/// Iteration cap of [`geometric_median`].
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Geometric median of `vecs` (all of equal length), starting from the zero
/// vector, with `tau` added to every distance and stopping once an update
/// moves less than `tau`.
pub fn geometric_median(vecs: &[Vec<f64>], tau: f64) -> Vec<f64> {
    let dim = vecs.first().map_or(0, Vec::len);
    let flat: Vec<f64> = vecs.iter().flatten().copied().collect();
    let mut out = vec![0.0; dim];
    geometric_median_into(&flat, dim, tau, DEFAULT_MAX_ITER, &mut out);
    out
}

/// Kernel form over `k` row-major vectors of length `dim`. Returns the number
/// of iterations used.
pub fn geometric_median_into(flat: &[f64], dim: usize, tau: f64, max_iter: usize, out: &mut [f64]) -> usize {
    let k = if dim == 0 { 0 } else { flat.len() / dim };
    if k == 0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return 0;
    }
    if k == 1 {
        out.copy_from_slice(&flat[..dim]);
        return 0;
    }
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut next = vec![0.0; dim];
    for it in 1..=max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut wsum = 0.0;
        for x in flat.chunks_exact(dim) {
            let d = x.iter().zip(out.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let w = 1.0 / (d + tau);
            wsum += w;
            for (nv, xv) in next.iter_mut().zip(x) {
                *nv += w * xv;
            }
        }
        let mut step = 0.0;
        for (o, nv) in out.iter_mut().zip(&next) {
            let v = nv / wsum;
            step += (v - *o) * (v - *o);
            *o = v;
        }
        if step.sqrt() < tau {
            return it;
        }
    }
    max_iter
}

/// `sum_i |y - x_i|`.
pub fn median_objective(vecs: &[Vec<f64>], y: &[f64]) -> f64 {
    vecs.iter().map(|x| crate::linalg::dist(x, y)).sum()
}
