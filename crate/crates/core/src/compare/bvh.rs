//! Axis-aligned bounding-box tree over triangles in R^3.

use nalgebra::Vector3;

type V3 = Vector3<f64>;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: V3,
    hi: V3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: V3::repeat(f64::INFINITY),
            hi: V3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &V3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn merge(&self, o: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.inf(&o.lo),
            hi: self.hi.sup(&o.hi),
        }
    }

    fn dist_sq(&self, p: &V3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&V3::zeros());
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: Aabb, tris: Vec<usize> },
    Inner { bbox: Aabb, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TriangleTree {
    tris: Vec<[V3; 3]>,
    nodes: Vec<Node>,
    root: usize,
}

const LEAF_SIZE: usize = 4;

impl TriangleTree {
    pub fn new(tris: Vec<[V3; 3]>) -> Self {
        let mut tree = Self {
            tris,
            nodes: Vec::new(),
            root: 0,
        };
        let centroids: Vec<V3> = tree.tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut ids: Vec<usize> = (0..tree.tris.len()).collect();
        tree.root = tree.build(&mut ids, &centroids);
        tree
    }

    fn build(&mut self, ids: &mut [usize], centroids: &[V3]) -> usize {
        let mut bbox = Aabb::empty();
        for &i in ids.iter() {
            for p in &self.tris[i] {
                bbox.grow(p);
            }
        }
        if ids.len() <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                bbox,
                tris: ids.to_vec(),
            });
            return self.nodes.len() - 1;
        }
        let ext = bbox.hi - bbox.lo;
        let axis = ext.imax();
        ids.sort_by(|&a, &b| centroids[a][axis].total_cmp(&centroids[b][axis]));
        let mid = ids.len() / 2;
        let (l, r) = ids.split_at_mut(mid);
        let left = self.build(l, centroids);
        let right = self.build(r, centroids);
        let bbox = self.nodes[left].bbox().merge(self.nodes[right].bbox());
        self.nodes.push(Node::Inner { bbox, left, right });
        self.nodes.len() - 1
    }

    pub fn triangle(&self, i: usize) -> &[V3; 3] {
        &self.tris[i]
    }

    /// Nearest triangle to `q` and the Euclidean distance to it.
    pub fn nearest(&self, q: &V3) -> Option<(usize, f64)> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bbox().dist_sq(q) >= best.1 {
                continue;
            }
            match node {
                Node::Leaf { tris, .. } => {
                    for &t in tris {
                        let d = (closest_point_on_triangle(q, &self.tris[t]) - q).norm_squared();
                        if d < best.1 {
                            best = (t, d);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let (dl, dr) = (self.nodes[*left].bbox().dist_sq(q), self.nodes[*right].bbox().dist_sq(q));
                    // visit the closer child first
                    if dl < dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        Some((best.0, best.1.sqrt()))
    }

    /// Triangles whose bounding box, grown by `margin`, contains `q`.
    pub fn candidates(&self, q: &V3, margin: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.tris.is_empty() {
            return out;
        }
        let mut stack = vec![self.root];
        let m2 = margin * margin;
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bbox().dist_sq(q) > m2 {
                continue;
            }
            match node {
                Node::Leaf { tris, .. } => {
                    for &t in tris {
                        let mut b = Aabb::empty();
                        self.tris[t].iter().for_each(|p| b.grow(p));
                        if b.dist_sq(q) <= m2 {
                            out.push(t);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        out
    }
}

/// Closest point to `p` on the triangle `t` (Ericson's region test).
pub fn closest_point_on_triangle(p: &V3, t: &[V3; 3]) -> V3 {
    let [a, b, c] = t;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(p: &V3, tris: &[[V3; 3]]) -> f64 {
        tris.iter()
            .map(|t| (closest_point_on_triangle(p, t) - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn closest_point_regions() {
        let t = [V3::zeros(), V3::x(), V3::y()];
        assert!((closest_point_on_triangle(&V3::new(0.2, 0.2, 1.0), &t) - V3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point_on_triangle(&V3::new(-1.0, -1.0, 0.0), &t), V3::zeros());
        assert_eq!(closest_point_on_triangle(&V3::new(2.0, -0.5, 0.0), &t), V3::x());
        let e = closest_point_on_triangle(&V3::new(1.0, 1.0, 0.0), &t);
        assert!((e - V3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = || V3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let tris: Vec<[V3; 3]> = (0..300).map(|_| {
            let c = v();
            [c, c + v() * 0.1, c + v() * 0.1]
        }).collect();
        let tree = TriangleTree::new(tris.clone());
        for _ in 0..200 {
            let q = v() * 1.5;
            let (_, d) = tree.nearest(&q).unwrap();
            assert!((d - brute(&q, &tris)).abs() < 1e-14);
        }
    }
}
