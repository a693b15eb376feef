//! Exact balanced 1D optimal assignment on the real line and on the circle
//! `R / Z`, plus 1D Wasserstein costs between empirical measures of
//! different sizes.
//!
//! On the circle the optimal matching between two sorted `n`-point sets is a
//! cyclic shift of the sorted matching. The default solver finds the shift
//! by minimizing the cost of the *lifted* matching `x_i -> y_{i+k} + floor((i+k)/n)`,
//! which is convex in `k`; [`solve_circle_enumerate`] checks all `n` shifts
//! and [`solve_circle_median_cut`] uses the weighted-median cut (exact for
//! `p = 1`).

use crate::error::{Error, Result};

/// Ground cost exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Power {
    One,
    Two,
}

impl Power {
    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Power::One => d.abs(),
            Power::Two => d * d,
        }
    }

    pub fn as_u32(self) -> u32 {
        match self {
            Power::One => 1,
            Power::Two => 2,
        }
    }

    pub fn from_u32(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Power::One),
            2 => Ok(Power::Two),
            _ => Err(Error::InvalidConfig(format!("p must be 1 or 2, got {p}"))),
        }
    }
}

/// A bijection from source indices to target indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub perm: Vec<usize>,
}

impl Assignment {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        for &j in &self.perm {
            if j >= seen.len() || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        true
    }

    /// `sum_i |src_i - dst_perm(i)|^p`.
    pub fn line_cost(&self, src: &[f64], dst: &[f64], p: Power) -> f64 {
        self.perm
            .iter()
            .enumerate()
            .map(|(i, &j)| p.apply(src[i] - dst[j]))
            .sum()
    }

    /// `sum_i d_circ(src_i, dst_perm(i))^p` with `d_circ = min(|D|, 1 - |D|)`.
    pub fn circle_cost(&self, src: &[f64], dst: &[f64], p: Power) -> f64 {
        self.perm
            .iter()
            .enumerate()
            .map(|(i, &j)| p.apply(circle_dist(src[i], dst[j])))
            .sum()
    }
}

/// Distance on `R / Z` between coordinates in `[0, 1)`.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Indices sorting `v` ascending, ties by index.
pub fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

fn check_lengths(src: &[f64], dst: &[f64]) -> Result<()> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch(src.len(), dst.len()));
    }
    Ok(())
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(&x) => Err(Error::Parse(format!("non-finite coordinate {x}"))),
        None => Ok(()),
    }
}

fn check_unit_interval(v: &[f64]) -> Result<()> {
    match v.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
        Some(&x) => Err(Error::CoordinateOutOfRange(x)),
        None => Ok(()),
    }
}

/// Sorted matching on the line; optimal for every `p >= 1`.
pub fn solve_line(src: &[f64], dst: &[f64]) -> Result<Assignment> {
    check_lengths(src, dst)?;
    check_finite(src)?;
    check_finite(dst)?;
    let is = argsort(src);
    let js = argsort(dst);
    let mut perm = vec![0; src.len()];
    for (i, j) in is.into_iter().zip(js) {
        perm[i] = j;
    }
    Ok(Assignment { perm })
}

fn shift_assignment(is: &[usize], js: &[usize], k: i64) -> Assignment {
    let n = is.len();
    let mut perm = vec![0; n];
    for (r, &i) in is.iter().enumerate() {
        let t = (r as i64 + k).rem_euclid(n as i64) as usize;
        perm[i] = js[t];
    }
    Assignment { perm }
}

/// Cost of matching sorted `xs[i]` with the lifted `ys[i + k] + floor((i + k) / n)`.
fn lifted_cost(xs: &[f64], ys: &[f64], k: i64, p: Power) -> f64 {
    let n = xs.len() as i64;
    let mut c = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let j = i as i64 + k;
        let q = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        c += p.apply(x - (ys[r] + q as f64));
    }
    c
}

/// Optimal assignment on the circle for exponent `p`.
pub fn solve_circle(src: &[f64], dst: &[f64], p: Power) -> Result<Assignment> {
    check_lengths(src, dst)?;
    check_unit_interval(src)?;
    check_unit_interval(dst)?;
    let n = src.len();
    if n == 0 {
        return Ok(Assignment::identity(0));
    }
    let is = argsort(src);
    let js = argsort(dst);
    let xs: Vec<f64> = is.iter().map(|&i| src[i]).collect();
    let ys: Vec<f64> = js.iter().map(|&j| dst[j]).collect();
    let k = match p {
        Power::One => median_cut_shift(&xs, &ys),
        Power::Two => lifted_argmin(&xs, &ys, p),
    };
    Ok(shift_assignment(&is, &js, k))
}

/// Smallest minimizer of the convex lifted cost over `k in [-n, n]`.
fn lifted_argmin(xs: &[f64], ys: &[f64], p: Power) -> i64 {
    let n = xs.len() as i64;
    let (mut lo, mut hi) = (-n, n);
    while lo < hi {
        let mid = lo + (hi - lo).div_euclid(2);
        if lifted_cost(xs, ys, mid + 1, p) - lifted_cost(xs, ys, mid, p) >= 0.0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Optimal cyclic shift for `p = 1` from the weighted median of
/// `D(t) = #{x <= t} - #{y <= t}` over `[0, 1)`, weighted by interval length.
fn median_cut_shift(xs: &[f64], ys: &[f64]) -> i64 {
    let n = xs.len();
    let mut segs: Vec<(i64, f64)> = Vec::with_capacity(2 * n + 1);
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = 0.0;
    let mut level = 0i64;
    while i < n || j < n {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        if next > t {
            segs.push((level, next - t));
            t = next;
        }
        while i < n && xs[i] == next {
            level += 1;
            i += 1;
        }
        while j < n && ys[j] == next {
            level -= 1;
            j += 1;
        }
    }
    if t < 1.0 {
        segs.push((level, 1.0 - t));
    }
    segs.sort_by_key(|s| s.0);
    let total: f64 = segs.iter().map(|s| s.1).sum();
    let mut acc = 0.0;
    for &(v, w) in &segs {
        acc += w;
        if acc >= 0.5 * total {
            return -v;
        }
    }
    -segs.last().map(|s| s.0).unwrap_or(0)
}

/// Circle assignment via the weighted-median cut. Exact for `p = 1`; for
/// `p = 2` it is a heuristic starting point.
pub fn solve_circle_median_cut(src: &[f64], dst: &[f64]) -> Result<Assignment> {
    check_lengths(src, dst)?;
    check_unit_interval(src)?;
    check_unit_interval(dst)?;
    if src.is_empty() {
        return Ok(Assignment::identity(0));
    }
    let is = argsort(src);
    let js = argsort(dst);
    let xs: Vec<f64> = is.iter().map(|&i| src[i]).collect();
    let ys: Vec<f64> = js.iter().map(|&j| dst[j]).collect();
    Ok(shift_assignment(&is, &js, median_cut_shift(&xs, &ys)))
}

/// Evaluates the circular cost of all `n` cyclic shifts of the sorted
/// matching, `O(n^2)`. Ties within `1e-12` prefer the median-cut shift.
pub fn solve_circle_enumerate(src: &[f64], dst: &[f64], p: Power) -> Result<Assignment> {
    check_lengths(src, dst)?;
    check_unit_interval(src)?;
    check_unit_interval(dst)?;
    let n = src.len();
    if n == 0 {
        return Ok(Assignment::identity(0));
    }
    let is = argsort(src);
    let js = argsort(dst);
    let xs: Vec<f64> = is.iter().map(|&i| src[i]).collect();
    let ys: Vec<f64> = js.iter().map(|&j| dst[j]).collect();
    let cost = |k: usize| -> f64 {
        (0..n)
            .map(|i| p.apply(circle_dist(xs[i], ys[(i + k) % n])))
            .sum()
    };
    let fast = median_cut_shift(&xs, &ys).rem_euclid(n as i64) as usize;
    let mut best = (fast, cost(fast));
    for k in 0..n {
        let c = cost(k);
        if c < best.1 - 1e-12 {
            best = (k, c);
        }
    }
    Ok(shift_assignment(&is, &js, best.0 as i64))
}

/// `W_p^p` between the uniform empirical measures on `x` and `y` on the line
/// (sizes may differ), through the quantile functions.
pub fn wasserstein_line(x: &[f64], y: &[f64], p: Power) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("measure"));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    Ok(wasserstein_line_sorted(&xs, &ys, p))
}

/// [`wasserstein_line`] on nonempty, sorted coordinates.
pub fn wasserstein_line_sorted(xs: &[f64], ys: &[f64], p: Power) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut c = 0.0;
    while i < n && j < m {
        let ui = (i + 1) as f64 / n as f64;
        let uj = (j + 1) as f64 / m as f64;
        let next = ui.min(uj);
        c += (next - u) * p.apply(xs[i] - ys[j]);
        u = next;
        if ui <= next {
            i += 1;
        }
        if uj <= next {
            j += 1;
        }
    }
    c
}

/// `W_p^p` on the circle `R / Z` between uniform empirical measures on
/// coordinates in `[0, 1)` (sizes may differ):
/// `min_alpha int_0^1 |Q_x(u) - Q~_y(u + alpha)|^p du`, with `Q~_y` the
/// quantile of the lifted, periodic `y`. Convex in `alpha`.
pub fn wasserstein_circle(x: &[f64], y: &[f64], p: Power) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("measure"));
    }
    check_unit_interval(x)?;
    check_unit_interval(y)?;
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    Ok(wasserstein_circle_sorted(&xs, &ys, p))
}

/// [`wasserstein_circle`] on nonempty, sorted coordinates in `[0, 1)`.
pub fn wasserstein_circle_sorted(xs: &[f64], ys: &[f64], p: Power) -> f64 {
    let f = |a: f64| lifted_quantile_cost(xs, ys, a, p);
    // golden-section search on [-1, 1]
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..64 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(0.5 * (a + b)))
}

fn lifted_quantile_cost(xs: &[f64], ys: &[f64], alpha: f64, p: Power) -> f64 {
    let (n, m) = (xs.len(), ys.len() as i64);
    let yq = |js: i64| ys[js.rem_euclid(m) as usize] + js.div_euclid(m) as f64;
    let mut js = (alpha * m as f64).floor() as i64;
    // guard floor() rounding at exact breakpoints
    if (js + 1) as f64 / m as f64 - alpha <= 0.0 {
        js += 1;
    }
    let mut i = 0usize;
    let mut u = 0.0;
    let mut c = 0.0;
    while i < n {
        let ui = (i + 1) as f64 / n as f64;
        let uj = (js + 1) as f64 / m as f64 - alpha;
        let next = ui.min(uj).min(1.0);
        if next > u {
            c += (next - u) * p.apply(xs[i] - yq(js));
            u = next;
        }
        if ui <= next {
            i += 1;
        }
        if uj <= next {
            js += 1;
        }
    }
    c
}
