//! Exact nearest-neighbour queries over flat point buffers.

use alloc::vec::Vec;

use crate::linalg::squared_distance;

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static k-d tree over `n` points of dimension `dim` stored row-major.
pub struct KdTree<'a> {
    coords: &'a [f64],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn new(coords: &'a [f64], dim: usize) -> Self {
        let n = coords.len().checked_div(dim).unwrap_or(0);
        let mut tree = KdTree {
            coords,
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n, 0);
        }
        tree
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the axis of largest extent
        let mut axis = depth % self.dim;
        let mut widest = -1.0;
        for a in 0..self.dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.coords[i * self.dim + a];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        let mid = start + (end - start) / 2;
        let coords = self.coords;
        let dim = self.dim;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * dim + axis].total_cmp(&coords[b * dim + axis])
        });
        let value = coords[self.order[mid] * dim + axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid, depth + 1);
        let right = self.build(mid, end, depth + 1);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Squared distance to the nearest stored point, or `None` if the tree is
    /// empty. When `stop_below` is given the search returns as soon as any
    /// point strictly closer than it is found (the returned value is then an
    /// upper bound below `stop_below`, not necessarily the minimum).
    pub fn nearest_squared(&self, q: &[f64], stop_below: Option<f64>) -> Option<f64> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = f64::INFINITY;
        self.search(0, q, &mut best, stop_below.unwrap_or(f64::NEG_INFINITY));
        Some(best)
    }

    fn search(&self, node: usize, q: &[f64], best: &mut f64, stop: f64) -> bool {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = squared_distance(q, self.point(i));
                    if d < *best {
                        *best = d;
                        if d < stop {
                            return true;
                        }
                    }
                }
                false
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                if self.search(near, q, best, stop) {
                    return true;
                }
                if diff * diff <= *best {
                    return self.search(far, q, best, stop);
                }
                false
            }
        }
    }
}

/// Indices of the points to keep when merging points that lie within `tol`
/// (Euclidean) of an earlier kept point. Keeps first occurrences, in order.
pub fn dedup_indices(coords: &[f64], dim: usize, tol: f64) -> Vec<usize> {
    let n = coords.len().checked_div(dim).unwrap_or(0);
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| coords[a * dim].total_cmp(&coords[b * dim]).then(a.cmp(&b)));
    let mut rank = alloc::vec![0usize; n];
    for (r, &i) in by_x.iter().enumerate() {
        rank[i] = r;
    }
    let tol2 = tol * tol;
    let mut kept = alloc::vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        let p = &coords[i * dim..(i + 1) * dim];
        let r = rank[i];
        let mut duplicate = false;
        // scan neighbours in x order on both sides within the tolerance band
        for dir in [-1isize, 1] {
            let mut k = r as isize + dir;
            while k >= 0 && (k as usize) < n {
                let j = by_x[k as usize];
                if (coords[j * dim] - p[0]).abs() > tol {
                    break;
                }
                if kept[j] && squared_distance(p, &coords[j * dim..(j + 1) * dim]) <= tol2 {
                    duplicate = true;
                    break;
                }
                k += dir;
            }
            if duplicate {
                break;
            }
        }
        if !duplicate {
            kept[i] = true;
            out.push(i);
        }
    }
    out
}
