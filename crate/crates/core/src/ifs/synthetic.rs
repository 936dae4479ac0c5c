//! Systems and point clouds with known ground truth.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::map::AffineMap;
use super::system::{IfsModel, PointSet};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math::sqrt;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows × cols` matrix of i.i.d. standard normal entries.
pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data).expect("consistent shape")
}

/// Random orthogonal matrix by modified Gram–Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(d: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(d, d, rng);
    let mut cols: Vec<Vec<f64>> = (0..d).map(|c| (0..d).map(|r| g[(r, c)]).collect()).collect();
    for i in 0..d {
        for j in 0..i {
            let (done, rest) = cols.split_at_mut(i);
            let proj = linalg::dot(&rest[0], &done[j]);
            linalg::axpy(&mut rest[0], -proj, &done[j]);
        }
        let n = linalg::norm(&cols[i]);
        cols[i].iter_mut().for_each(|v| *v /= n);
    }
    let mut q = Matrix::zeros(d, d);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            q[(r, c)] = *v;
        }
    }
    q
}

/// Matrix `U·diag(s)·Vᵀ` whose largest singular value is exactly `norm`;
/// the remaining singular values are drawn from `[0.05, 0.85]·norm`.
pub fn matrix_with_norm<R: Rng>(d: usize, norm: f64, rng: &mut R) -> Matrix {
    let u = random_orthogonal(d, rng);
    let v = random_orthogonal(d, rng);
    let mut s = vec![norm; d];
    for x in s.iter_mut().skip(1) {
        *x = norm * rng.random_range(0.05..0.85);
    }
    let us = u.matmul(&Matrix::diagonal(&s)).expect("square");
    us.matmul(&v.transpose()).expect("square")
}

/// Random affine map with operator norm `norm` and a standard normal translation.
pub fn map_with_norm(d: usize, norm: f64, seed: u64) -> Result<AffineMap> {
    let mut r = rng(seed);
    let m = matrix_with_norm(d, norm, &mut r);
    let t = (0..d).map(|_| r.sample(StandardNormal)).collect();
    AffineMap::new(m, t)
}

/// `n` standard normal points in `ℝ^d` as matrix rows.
pub fn gaussian_points(n: usize, d: usize, seed: u64) -> Matrix {
    gaussian_matrix(n, d, &mut rng(seed))
}

/// Vertices of the unit equilateral triangle.
pub fn triangle_corners() -> [[f64; 2]; 3] {
    [[0.0, 0.0], [1.0, 0.0], [0.5, sqrt(3.0) / 2.0]]
}

/// The three half-scale maps toward the triangle corners.
pub fn sierpinski() -> IfsModel {
    let maps = triangle_corners()
        .iter()
        .map(|c| AffineMap::homothety(0.5, c).expect("finite homothety"))
        .collect();
    IfsModel::new(maps, 1).expect("non-empty family")
}

/// `{f_{w₁} ∘ … ∘ f_{w_depth}(start)}` over every address word `w`,
/// enumerated directly rather than through the Hutchinson operator.
pub fn address_set(model: &IfsModel, start: &[f64], depth: u32) -> Result<PointSet> {
    let maps = model.maps();
    let k = maps.len();
    let d = start.len();
    let count = k
        .checked_pow(depth)
        .ok_or_else(|| Error::InvalidArgument("address enumeration too large".into()))?;
    let mut coords = Vec::with_capacity(count * d);
    let mut cur = vec![0.0; d];
    let mut next = vec![0.0; d];
    for word in 0..count {
        cur.copy_from_slice(start);
        let mut w = word;
        // least significant digit is the innermost map
        for _ in 0..depth {
            maps[w % k].apply_into(&cur, &mut next);
            core::mem::swap(&mut cur, &mut next);
            w /= k;
        }
        coords.extend_from_slice(&cur);
    }
    PointSet::new(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::operator_norm;

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(6, &mut rng(3));
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&Matrix::identity(6)) < 1e-12);
    }

    #[test]
    fn constructed_norm_is_exact() {
        let m = matrix_with_norm(8, 0.6, &mut rng(11));
        assert!((operator_norm(&m).unwrap() - 0.6).abs() < 1e-5);
    }

    #[test]
    fn address_set_size() {
        let s = address_set(&sierpinski(), &[0.2, 0.2], 4).unwrap();
        assert_eq!(s.len(), 81);
    }
}
