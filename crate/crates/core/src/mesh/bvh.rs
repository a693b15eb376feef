//! Bounding volume hierarchy over flat triangles for rays from the origin.

use crate::linalg::{cross3, dot};

const LEAF: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Aabb {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Aabb {
    fn empty() -> Self {
        Self { lo: [f64::INFINITY; 3], hi: [f64::NEG_INFINITY; 3] }
    }

    fn grow(&mut self, p: &[f64; 3]) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(p[k]);
            self.hi[k] = self.hi[k].max(p[k]);
        }
    }

    /// Slab test for the ray `t * dir`, `t >= 0`, with a relative margin.
    fn hit_from_origin(&self, inv: &[f64; 3]) -> bool {
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for k in 0..3 {
            let pad = 1e-9 * (self.hi[k] - self.lo[k]).abs().max(1e-12);
            let (a, b) = ((self.lo[k] - pad) * inv[k], (self.hi[k] + pad) * inv[k]);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            // 0 * inf is NaN when the ray is parallel to a slab through the origin
            let a = if a.is_nan() { f64::NEG_INFINITY } else { a };
            let b = if b.is_nan() { f64::INFINITY } else { b };
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { bbox: Aabb, start: usize, end: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

/// Ray hit: triangle index, barycentric coordinates, ray parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub triangle: usize,
    pub bary: [f64; 3],
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    tris: Vec<[[f64; 3]; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl Bvh {
    /// Median split along the longest centroid extent.
    pub fn new(tris: Vec<[[f64; 3]; 3]>) -> Self {
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &mut order, 0, tris.len(), &mut nodes);
        }
        Self { tris, order, nodes }
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Best hit of the ray from the origin through `dir`, accepting
    /// barycentric coordinates down to `-tol`; among several candidates the
    /// one whose smallest coordinate is largest wins.
    pub fn cast(&self, dir: &[f64; 3], tol: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = dir.map(|d| 1.0 / d);
        let mut best: Option<(f64, Hit)> = None;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                Node::Inner { bbox, left, right } => {
                    if bbox.hit_from_origin(&inv) {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
                Node::Leaf { bbox, start, end } => {
                    if !bbox.hit_from_origin(&inv) {
                        continue;
                    }
                    for &ti in &self.order[*start..*end] {
                        if let Some(h) = intersect(&self.tris[ti], dir, ti) {
                            let score = h.bary.iter().cloned().fold(f64::INFINITY, f64::min);
                            if score >= -tol && best.is_none_or(|(s, _)| score > s) {
                                best = Some((score, h));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, h)| h)
    }
}

fn centroid(t: &[[f64; 3]; 3], k: usize) -> f64 {
    (t[0][k] + t[1][k] + t[2][k]) / 3.0
}

fn build(tris: &[[[f64; 3]; 3]], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let mut bbox = Aabb::empty();
    let mut cbox = Aabb::empty();
    for &t in &order[start..end] {
        tris[t].iter().for_each(|p| bbox.grow(p));
        cbox.grow(&[centroid(&tris[t], 0), centroid(&tris[t], 1), centroid(&tris[t], 2)]);
    }
    let id = nodes.len();
    if end - start <= LEAF {
        nodes.push(Node::Leaf { bbox, start, end });
        return id;
    }
    let axis = (0..3)
        .max_by(|&a, &b| (cbox.hi[a] - cbox.lo[a]).total_cmp(&(cbox.hi[b] - cbox.lo[b])))
        .unwrap();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroid(&tris[a], axis).total_cmp(&centroid(&tris[b], axis))
    });
    nodes.push(Node::Leaf { bbox, start, end });
    let left = build(tris, order, start, mid, nodes);
    let right = build(tris, order, mid, end, nodes);
    nodes[id] = Node::Inner { bbox, left, right };
    id
}

/// Moller-Trumbore for the ray `t * dir`, `t > 0`, without an edge test.
fn intersect(tri: &[[f64; 3]; 3], dir: &[f64; 3], index: usize) -> Option<Hit> {
    let e1 = sub(&tri[1], &tri[0]);
    let e2 = sub(&tri[2], &tri[0]);
    let p = cross3(dir, &e2);
    let det = dot(&e1, &p);
    if det.abs() < 1e-300 {
        return None;
    }
    let s = [-tri[0][0], -tri[0][1], -tri[0][2]];
    let u = dot(&s, &p) / det;
    let q = cross3(&s, &e1);
    let v = dot(dir, &q) / det;
    let t = dot(&e2, &q) / det;
    if !(t > 0.0) {
        return None;
    }
    Some(Hit { triangle: index, bary: [1.0 - u - v, u, v], t })
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
