//! Bounding-volume hierarchy over mesh faces.
//!
//! Purely an accelerator: every query returns exactly what an exhaustive scan
//! over the faces would return.

use nalgebra::Vector3;
use smallvec::SmallVec;

use super::ray::Ray;

const LEAF_SIZE: usize = 4;
/// Absolute box padding (mm) so rounding in the slab test never culls a face
/// that the triangle test would accept.
const BOX_PAD: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Vector3::repeat(f64::INFINITY),
            max: Vector3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.min = self.min.inf(&o.min);
        self.max = self.max.sup(&o.max);
    }

    fn padded(mut self) -> Self {
        let pad = Vector3::repeat(BOX_PAD);
        let rel = (self.max - self.min).abs() * 1e-9;
        self.min -= pad + rel;
        self.max += pad + rel;
        self
    }

    /// Entry distance of the ray into the box, if it enters before `t_max`.
    #[inline]
    fn ray_entry(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            if !inv_dir[k].is_finite() {
                // ray parallel to this slab
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if lo > t0 {
                t0 = lo;
            }
            if hi < t1 {
                t1 = hi;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    fn distance_sq_to_segment_box(&self, lo: &Vector3<f64>, hi: &Vector3<f64>) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let gap = (lo[k] - self.max[k]).max(self.min[k] - hi[k]).max(0.0);
            d += gap * gap;
        }
        d
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first index into `order`. Inner: index of the left child
    /// (right child is `left + 1`).
    start: u32,
    /// Zero for inner nodes.
    count: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

pub(crate) struct RayCandidate {
    pub face: usize,
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl Bvh {
    /// Builds over the faces listed in `faces` (degenerate faces already
    /// excluded by the caller).
    pub fn build(faces: Vec<u32>, tri_bounds: &dyn Fn(u32) -> Aabb) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: faces,
        };
        if bvh.order.is_empty() {
            return bvh;
        }
        let boxes: Vec<(Aabb, Vector3<f64>)> = bvh
            .order
            .iter()
            .map(|&f| {
                let b = tri_bounds(f);
                (b, (b.min + b.max) * 0.5)
            })
            .collect();
        // order holds face ids; boxes indexed by position in the original list
        let mut items: Vec<(u32, usize)> = bvh.order.iter().copied().zip(0..).collect();
        bvh.nodes.push(Node {
            bounds: Aabb::empty(),
            start: 0,
            count: 0,
        });
        bvh.split(0, &mut items, 0, &boxes);
        bvh.order = items.into_iter().map(|(f, _)| f).collect();
        bvh
    }

    fn split(
        &mut self,
        node: usize,
        items: &mut [(u32, usize)],
        offset: usize,
        boxes: &[(Aabb, Vector3<f64>)],
    ) {
        let mut bounds = Aabb::empty();
        let mut centroid_bounds = Aabb::empty();
        for &(_, i) in items.iter() {
            bounds.merge(&boxes[i].0);
            centroid_bounds.grow(&boxes[i].1);
        }
        self.nodes[node].bounds = bounds.padded();
        let extent = centroid_bounds.max - centroid_bounds.min;
        if items.len() <= LEAF_SIZE || extent.amax() <= 0.0 {
            self.nodes[node].start = offset as u32;
            self.nodes[node].count = items.len() as u32;
            return;
        }
        let axis = extent.imax();
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |a, b| {
            boxes[a.1].1[axis]
                .total_cmp(&boxes[b.1].1[axis])
                .then(a.0.cmp(&b.0))
        });
        let left = self.nodes.len();
        for _ in 0..2 {
            self.nodes.push(Node {
                bounds: Aabb::empty(),
                start: 0,
                count: 0,
            });
        }
        self.nodes[node].start = left as u32;
        self.nodes[node].count = 0;
        let (lo, hi) = items.split_at_mut(mid);
        self.split(left, lo, offset, boxes);
        self.split(left + 1, hi, offset + mid, boxes);
    }

    /// Nearest accepted hit under the tie rule: among hits whose `t` is
    /// within `tie_eps` of the minimum, the lowest face index wins.
    pub fn first_hit(
        &self,
        ray: &Ray,
        t_max: f64,
        tie_eps: f64,
        test: &dyn Fn(usize) -> Option<(f64, f64, f64)>,
    ) -> Option<RayCandidate> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = ray.direction.map(|d| 1.0 / d);
        let mut best_t = t_max;
        let mut candidates: SmallVec<[RayCandidate; 8]> = SmallVec::new();
        let mut stack: SmallVec<[u32; 64]> = SmallVec::new();
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            let limit = best_t + tie_eps;
            if node.bounds.ray_entry(&ray.origin, &inv_dir, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    let f = f as usize;
                    if let Some((t, u, v)) = test(f) {
                        if t <= t_max && t <= best_t + tie_eps {
                            if t < best_t {
                                best_t = t;
                            }
                            candidates.push(RayCandidate { face: f, t, u, v });
                        }
                    }
                }
                continue;
            }
            let l = node.start;
            let r = l + 1;
            let tl = self.nodes[l as usize]
                .bounds
                .ray_entry(&ray.origin, &inv_dir, limit);
            let tr = self.nodes[r as usize]
                .bounds
                .ray_entry(&ray.origin, &inv_dir, limit);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    // nearer child popped first
                    if a <= b {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                (Some(_), None) => stack.push(l),
                (None, Some(_)) => stack.push(r),
                (None, None) => {}
            }
        }
        pick_canonical(candidates.into_iter(), tie_eps)
    }

    /// Calls `visit` on every face whose box comes within `radius` of the
    /// axis-aligned box spanned by the segment; stops early when `visit`
    /// returns `true` and reports whether it did.
    pub fn any_near_segment(
        &self,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
        radius: f64,
        visit: &mut dyn FnMut(usize) -> bool,
    ) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let lo = a.inf(b);
        let hi = a.sup(b);
        let r2 = radius * radius;
        let mut stack: SmallVec<[u32; 64]> = SmallVec::new();
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bounds.distance_sq_to_segment_box(&lo, &hi) > r2 {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &f in &self.order[s..s + node.count as usize] {
                    if visit(f as usize) {
                        return true;
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        false
    }
}

/// Canonical choice among candidate hits: minimum `t`, then the lowest face
/// index among those within `tie_eps` of it.
pub(crate) fn pick_canonical(
    candidates: impl Iterator<Item = RayCandidate>,
    tie_eps: f64,
) -> Option<RayCandidate> {
    let cands: SmallVec<[RayCandidate; 8]> = candidates.collect();
    let t_min = cands.iter().map(|c| c.t).fold(f64::INFINITY, f64::min);
    cands
        .into_iter()
        .filter(|c| c.t <= t_min + tie_eps)
        .min_by_key(|c| c.face)
}

pub(crate) fn triangle_bounds(v: [&Vector3<f64>; 3]) -> Aabb {
    let mut b = Aabb::empty();
    for p in v {
        b.grow(p);
    }
    b
}
