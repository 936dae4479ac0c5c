use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::map::AffineMap;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::math::sqrt;
use crate::spatial::{dedup_indices, KdTree};

/// Points closer than this are merged by [`hutchinson_apply`].
pub const DEDUP_TOLERANCE: f64 = 1e-9;
/// Coordinate magnitude that [`simulate_ifs`] treats as divergence.
pub const EXPLOSION_LIMIT: f64 = 1e12;

/// A finite set of points in `ℝ^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidShape("points need dimension at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidShape(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        PointSet::new(m.cols(), m.as_slice().to_vec())
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        PointSet::new(m.cols(), m.as_slice().to_vec())
    }

    pub fn singleton(p: &[f64]) -> Result<Self> {
        PointSet::new(p.len(), p.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.len(), self.dim, self.coords.clone()).expect("consistent shape")
    }

    /// Largest pairwise Euclidean distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.max(squared_distance(self.point(i), self.point(j)));
            }
        }
        sqrt(best)
    }

    /// Applies `map` to every point.
    pub fn mapped(&self, map: &AffineMap) -> Result<PointSet> {
        check_dim(map.dim(), self.dim)?;
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self
            .coords
            .chunks_exact(self.dim)
            .zip(coords.chunks_exact_mut(self.dim))
        {
            map.apply_into(src, dst);
        }
        Ok(PointSet { dim: self.dim, coords })
    }

    fn dedup(self, tol: f64) -> PointSet {
        let keep = dedup_indices(&self.coords, self.dim, tol);
        if keep.len() == self.len() {
            return self;
        }
        let mut coords = Vec::with_capacity(keep.len() * self.dim);
        for i in keep {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { dim: self.dim, coords }
    }

    fn max_abs(&self) -> f64 {
        self.coords.iter().fold(
            0.0,
            |m: f64, v| {
                if v.is_finite() {
                    m.max(v.abs())
                } else {
                    f64::INFINITY
                }
            },
        )
    }
}

/// A finite family of affine maps plus the iteration count used to reach
/// the modelled states.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsModel {
    maps: Vec<AffineMap>,
    iter: usize,
}

impl IfsModel {
    pub fn new(maps: Vec<AffineMap>, iter: usize) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(Error::InvalidArgument("an IFS needs at least one map".into()));
        };
        if iter == 0 {
            return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
        }
        let d = first.dim();
        for m in &maps {
            check_dim(d, m.dim())?;
        }
        Ok(IfsModel { maps, iter })
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn iter_count(&self) -> usize {
        self.iter
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    /// True when every map has operator norm below one.
    pub fn is_contractive(&self) -> bool {
        self.maps.iter().all(AffineMap::is_contractive)
    }
}

/// Hutchinson operator `F(S) = ⋃ fᵢ(S)`, with points closer than
/// [`DEDUP_TOLERANCE`] merged. Output is map-major in input order.
pub fn hutchinson_apply(model: &IfsModel, points: &PointSet) -> Result<PointSet> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    check_dim(model.dim(), points.dim())?;
    let mut coords = Vec::with_capacity(points.coords.len() * model.maps.len());
    for m in &model.maps {
        coords.extend(points.mapped(m)?.coords);
    }
    Ok(PointSet {
        dim: points.dim,
        coords,
    }
    .dedup(DEDUP_TOLERANCE))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    /// Apply the full Hutchinson operator each step.
    Full,
    /// Move every point by one uniformly drawn map per step.
    ChaosGame { seed: u64 },
}

/// Trajectory `S₀, S₁, …, S_iters` of the system.
pub fn simulate_ifs(model: &IfsModel, s0: &PointSet, iters: usize, mode: SimulationMode) -> Result<Vec<PointSet>> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    if s0.is_empty() {
        return Err(Error::EmptySet);
    }
    check_dim(model.dim(), s0.dim())?;
    let mut rng = match mode {
        SimulationMode::ChaosGame { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        SimulationMode::Full => None,
    };
    let mut traj = Vec::with_capacity(iters + 1);
    traj.push(s0.clone());
    for step in 1..=iters {
        let prev = &traj[step - 1];
        let next = match rng.as_mut() {
            None => hutchinson_apply(model, prev)?,
            Some(rng) => {
                let mut coords = vec![0.0; prev.coords.len()];
                for (src, dst) in prev
                    .coords
                    .chunks_exact(prev.dim)
                    .zip(coords.chunks_exact_mut(prev.dim))
                {
                    let k = rng.random_range(0..model.maps.len());
                    model.maps[k].apply_into(src, dst);
                }
                PointSet { dim: prev.dim, coords }
            }
        };
        if next.max_abs() > EXPLOSION_LIMIT {
            return Err(Error::ExplosionGuard {
                iteration: step,
                limit: EXPLOSION_LIMIT,
            });
        }
        traj.push(next);
    }
    Ok(traj)
}

// below this many point pairs a plain scan beats building a tree
const SCAN_PAIRS: usize = 1 << 14;
// k-d trees stop paying off in high dimension
const TREE_MAX_DIM: usize = 8;

/// `max_{a∈A} min_{b∈B} ‖a − b‖`.
pub fn directed_hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    check_dim(a.dim, b.dim)?;
    // points that already have a neighbour closer than the running maximum
    // cannot raise it, so their search may stop early
    let mut worst = 0.0_f64;
    if a.len().saturating_mul(b.len()) <= SCAN_PAIRS || a.dim > TREE_MAX_DIM {
        for p in a.iter() {
            let mut nearest = f64::INFINITY;
            for q in b.iter() {
                let d = squared_distance(p, q);
                if d < nearest {
                    nearest = d;
                    if nearest < worst {
                        break;
                    }
                }
            }
            worst = worst.max(nearest);
        }
    } else {
        let tree = KdTree::new(&b.coords, b.dim);
        for p in a.iter() {
            let nearest = tree.nearest_squared(p, Some(worst)).expect("tree over a non-empty set");
            worst = worst.max(nearest);
        }
    }
    Ok(sqrt(worst))
}

/// Symmetric Hausdorff distance under the Euclidean norm.
pub fn hausdorff_distance(a: &PointSet, b: &PointSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// `d_H(S, φ(S))`: how far `points` are from being invariant under `map`.
pub fn collage_error(points: &PointSet, map: &AffineMap) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    hausdorff_distance(points, &points.mapped(map)?)
}
