//! Bounding-volume hierarchy over camera-space triangles and nearest-hit
//! ray queries.

use alloc::vec::Vec;

use crate::math::Vec3;

/// Determinant threshold of the ray-triangle test.
pub const INTERSECTION_EPS: f64 = 1e-9;
/// Barycentric slack so rays through shared edges hit one of the triangles.
const EDGE_SLACK: f64 = 1e-12;
const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub triangle: u32,
    /// Barycentric weights of vertices 1 and 2.
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        let inf = f64::INFINITY;
        Aabb { lo: Vec3::new(inf, inf, inf), hi: Vec3::new(-inf, -inf, -inf) }
    }

    fn grow(&mut self, p: Vec3) {
        self.lo = self.lo.min(p);
        self.hi = self.hi.max(p);
    }

    fn union(&mut self, o: &Aabb) {
        self.lo = self.lo.min(o.lo);
        self.hi = self.hi.max(o.hi);
    }

    /// Slab test; returns the entry distance when the box is hit before `t_max`.
    #[inline]
    fn hit(&self, origin: Vec3, inv_dir: Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = origin.axis(axis);
            let inv = inv_dir.axis(axis);
            let mut a = (self.lo.axis(axis) - o) * inv;
            let mut b = (self.hi.axis(axis) - o) * inv;
            if a > b {
                core::mem::swap(&mut a, &mut b);
            }
            // NaN (0 * inf) keeps the previous bound.
            if a > t0 {
                t0 = a;
            }
            if b < t1 {
                t1 = b;
            }
            if t0 > t1 * (1.0 + 4.0 * f64::EPSILON) {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bvh {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl Bvh {
    pub fn new(triangles: Vec<[Vec3; 3]>) -> Self {
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::new();
        if !triangles.is_empty() {
            let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]).scale(1.0 / 3.0)).collect();
            build(&triangles, &centroids, &mut order, 0, &mut nodes);
        }
        Bvh { triangles, order, nodes }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Nearest hit with `t` in `(INTERSECTION_EPS, t_max)`.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds().hit(origin, inv_dir, limit).is_none() {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    for &ti in &self.order[start as usize..(start + count) as usize] {
                        if let Some((t, u, v)) = intersect_triangle(&self.triangles[ti as usize], origin, dir) {
                            let closer = match best {
                                None => t < limit,
                                Some(b) => t < b.t || (t == b.t && ti < b.triangle),
                            };
                            if closer {
                                limit = t;
                                best = Some(Hit { t, triangle: ti, u, v });
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}

fn build(triangles: &[[Vec3; 3]], centroids: &[Vec3], order: &mut [u32], start: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in order.iter() {
        for p in &triangles[i as usize] {
            bounds.grow(*p);
        }
        cbounds.grow(centroids[i as usize]);
    }
    let index = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start: start as u32, count: order.len() as u32 });
        return index;
    }
    let extent = cbounds.hi - cbounds.lo;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    order.sort_by(|&a, &b| {
        centroids[a as usize].axis(axis).total_cmp(&centroids[b as usize].axis(axis)).then(a.cmp(&b))
    });
    let mid = order.len() / 2;
    nodes.push(Node::Leaf { bounds, start: 0, count: 0 });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build(triangles, centroids, lo, start, nodes);
    let right = build(triangles, centroids, hi, start + mid, nodes);
    let mut b = *nodes[left as usize].bounds();
    b.union(nodes[right as usize].bounds());
    nodes[index as usize] = Node::Inner { bounds: b, left, right };
    index
}

/// Möller–Trumbore ray-triangle test. Returns `(t, u, v)`.
#[inline]
pub fn intersect_triangle(tri: &[Vec3; 3], origin: Vec3, dir: Vec3) -> Option<(f64, f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= INTERSECTION_EPS * scale {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(p) * inv;
    if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < -EDGE_SLACK || u + v > 1.0 + EDGE_SLACK {
        return None;
    }
    let t = e2.dot(q) * inv;
    if t > INTERSECTION_EPS {
        Some((t, u, v))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};

    #[test]
    fn triangle_hit_and_miss() {
        let tri = [Vec3::new(-1.0, -1.0, 2.0), Vec3::new(1.0, -1.0, 2.0), Vec3::new(0.0, 1.0, 2.0)];
        let (t, _, _) = intersect_triangle(&tri, Vec3::ZERO, Vec3::Z).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(intersect_triangle(&tri, Vec3::ZERO, Vec3::new(3.0, 0.0, 1.0)).is_none());
        assert!(intersect_triangle(&tri, Vec3::ZERO, -Vec3::Z).is_none());
    }

    #[test]
    fn bvh_matches_brute_force() {
        let mut tris = Vec::new();
        for i in 0..40 {
            let f = i as f64;
            let c = Vec3::new(sin(f * 0.37), cos(f * 0.91), 2.0 + sin(f * 0.13));
            tris.push([c, c + Vec3::new(0.3, 0.05, 0.1), c + Vec3::new(0.02, 0.3, -0.1)]);
        }
        let bvh = Bvh::new(tris.clone());
        for i in 0..200 {
            let f = i as f64 * 0.01;
            let dir = Vec3::new(sin(f) * 0.6, cos(f * 3.0) * 0.6, 1.0);
            let brute = tris
                .iter()
                .enumerate()
                .filter_map(|(k, t)| intersect_triangle(t, Vec3::ZERO, dir).map(|h| (h.0, k)))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let fast = bvh.intersect(Vec3::ZERO, dir, f64::INFINITY).map(|h| (h.t, h.triangle as usize));
            assert_eq!(brute, fast);
        }
    }
}
