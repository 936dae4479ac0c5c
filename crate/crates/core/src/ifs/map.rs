use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm, Matrix};
use crate::math::{abs, sqrt};

const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITERS: usize = 500;

/// `v ↦ M·v + t` with a cached operator-norm estimate of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: Matrix,
    translation: Vec<f64>,
    operator_norm_bound: f64,
}

impl AffineMap {
    pub fn new(matrix: Matrix, translation: Vec<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidShape(format!(
                "affine matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dim(matrix.rows(), translation.len())?;
        if !matrix.is_finite() {
            return Err(Error::NonFiniteInput("affine matrix"));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("affine translation"));
        }
        let operator_norm_bound = operator_norm(&matrix)?;
        Ok(AffineMap {
            matrix,
            translation,
            operator_norm_bound,
        })
    }

    /// `v ↦ s·v + (1 − s)·anchor`, a uniform contraction toward `anchor`.
    pub fn homothety(scale: f64, anchor: &[f64]) -> Result<Self> {
        let d = anchor.len();
        let matrix = Matrix::identity(d).scaled(scale);
        let translation = anchor.iter().map(|a| (1.0 - scale) * a).collect();
        AffineMap::new(matrix, translation)
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap {
            matrix: Matrix::identity(dim),
            translation: vec![0.0; dim],
            operator_norm_bound: if dim == 0 { 0.0 } else { 1.0 },
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn operator_norm_bound(&self) -> f64 {
        self.operator_norm_bound
    }

    pub fn is_contractive(&self) -> bool {
        self.operator_norm_bound < 1.0
    }

    /// Writes `M·v + t` into `out`; dimensions are the caller's responsibility.
    #[inline]
    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = linalg::dot(self.matrix.row(i), v) + self.translation[i];
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        affine_apply(self, v)
    }
}

pub fn affine_apply(map: &AffineMap, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(map.dim(), v.len())?;
    let mut out = vec![0.0; map.dim()];
    map.apply_into(v, &mut out);
    Ok(out)
}

/// `φᵏ(v)`; `k = 0` returns `v`.
pub fn iterate_map(map: &AffineMap, v: &[f64], k: usize) -> Result<Vec<f64>> {
    check_dim(map.dim(), v.len())?;
    let mut cur = v.to_vec();
    let mut next = vec![0.0; v.len()];
    for _ in 0..k {
        map.apply_into(&cur, &mut next);
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Top singular value of a square matrix.
///
/// Runs Lanczos on `MᵀM` (power iteration with the whole Krylov history
/// kept and reorthogonalised) from the normalised all-ones vector. It stops
/// once the top Ritz pair has residual at most `1e-6` relative, or once the
/// Krylov space is exhausted, and gives up after 500 steps. Plain power
/// iteration can stall for many steps near the second singular value and
/// stop early there. The estimate is never allowed to fall below the largest
/// column norm, which is a hard lower bound; a start vector that misses the
/// dominant direction is retried from that column's basis vector.
pub fn operator_norm(matrix: &Matrix) -> Result<f64> {
    if !matrix.is_square() {
        return Err(Error::InvalidShape(format!(
            "operator norm needs a square matrix, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    if !matrix.is_finite() {
        return Err(Error::NonFiniteInput("matrix"));
    }
    let d = matrix.cols();
    if d == 0 {
        return Ok(0.0);
    }
    let (best_col, col_norm) = (0..d)
        .map(|c| {
            let s: f64 = (0..d).map(|r| matrix[(r, c)] * matrix[(r, c)]).sum();
            (c, sqrt(s))
        })
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if col_norm == 0.0 {
        return Ok(0.0);
    }

    let start = vec![1.0 / sqrt(d as f64); d];
    let estimate = lanczos_top(matrix, start)?;
    if estimate >= col_norm * (1.0 - 1e-12) {
        return Ok(estimate.max(col_norm));
    }
    let mut basis = vec![0.0; d];
    basis[best_col] = 1.0;
    Ok(lanczos_top(matrix, basis)?.max(estimate).max(col_norm))
}

// Ritz values are only extracted every few steps once the basis grows,
// since each extraction costs a dense eigen-decomposition of the tridiagonal.
fn should_check(step: usize) -> bool {
    step < 32 || step.is_multiple_of(8)
}

fn lanczos_top(matrix: &Matrix, start: Vec<f64>) -> Result<f64> {
    let d = matrix.cols();
    let limit = POWER_MAX_ITERS.min(d);
    let gram = |v: &[f64]| -> Result<Vec<f64>> { matrix.transpose_matvec(&matrix.matvec(v)?) };
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for step in 0..POWER_MAX_ITERS {
        let q = &basis[step];
        let mut w = gram(q)?;
        alpha.push(linalg::dot(q, &w));
        // two passes of Gram-Schmidt keep the basis orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::dot(b, &w);
                linalg::axpy(&mut w, -c, b);
            }
        }
        let b = norm(&w);
        let k = alpha.len();
        let exhausted = k >= limit || b <= 1e-14 * alpha.iter().fold(0.0_f64, |m, a| m.max(abs(*a)));
        if exhausted || should_check(step) {
            let mut t = Matrix::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alpha[i];
                if i + 1 < k {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let (values, vectors) = linalg::symmetric_eigen(&t)?;
            theta = values[0].max(0.0);
            let residual = b * abs(vectors[(k - 1, 0)]);
            if exhausted || residual <= POWER_TOL * theta {
                return Ok(sqrt(theta));
            }
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
    Err(Error::NoConvergence { estimate: sqrt(theta) })
}

/// Rescales `matrix` so that its operator norm is at most `1 − epsilon`.
/// Already feasible matrices are returned unchanged.
pub fn project_contractive(matrix: &Matrix, epsilon: f64) -> Result<Matrix> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "contractivity margin must lie in (0, 1), got {epsilon}"
        )));
    }
    let target = 1.0 - epsilon;
    let n = operator_norm(matrix)?;
    // slack absorbs the last-ulp wobble of re-estimating an already scaled matrix
    if n <= target + 1e-12 {
        Ok(matrix.clone())
    } else {
        Ok(matrix.scaled(target / n))
    }
}

/// Solves `(I − M)·V* = t`.
pub fn fixed_point(map: &AffineMap) -> Result<Vec<f64>> {
    if !map.is_contractive() {
        return Err(Error::NotContractive {
            norm: map.operator_norm_bound,
        });
    }
    let d = map.dim();
    let mut a = Matrix::identity(d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] -= map.matrix[(i, j)];
        }
    }
    linalg::solve_vec(&a, &map.translation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_map() -> AffineMap {
        AffineMap::new(Matrix::identity(2).scaled(0.5), vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn apply_hand_arithmetic() {
        let m = half_map();
        let once = affine_apply(&m, &[0.0, 0.0]).unwrap();
        assert_eq!(once, vec![1.0, 0.0]);
        assert_eq!(affine_apply(&m, &once).unwrap(), vec![1.5, 0.0]);
    }

    #[test]
    fn constant_and_identity_maps() {
        let t0 = vec![3.0, -1.0];
        let c = AffineMap::new(Matrix::zeros(2, 2), t0.clone()).unwrap();
        assert_eq!(affine_apply(&c, &[9.0, 9.0]).unwrap(), t0);
        assert_eq!(fixed_point(&c).unwrap(), t0);
        let id = AffineMap::new(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(affine_apply(&id, &[4.0, 5.0]).unwrap(), vec![4.0, 5.0]);
        assert!(matches!(fixed_point(&id), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn dim_mismatch() {
        let m = half_map();
        assert_eq!(
            affine_apply(&m, &[1.0]),
            Err(Error::DimMismatch { expected: 2, found: 1 })
        );
        assert!(iterate_map(&m, &[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn iterate_converges_to_fixed_point() {
        let m = half_map();
        assert_eq!(iterate_map(&m, &[7.0, 7.0], 0).unwrap(), vec![7.0, 7.0]);
        let far = iterate_map(&m, &[0.0, 0.0], 80).unwrap();
        assert!((far[0] - 2.0).abs() < 1e-12 && far[1].abs() < 1e-12);
        let fp = fixed_point(&m).unwrap();
        assert!((fp[0] - 2.0).abs() < 1e-12 && fp[1].abs() < 1e-12);
    }

    #[test]
    fn operator_norm_simple_cases() {
        let diag = Matrix::diagonal(&[0.3, 0.9]);
        assert!((operator_norm(&diag).unwrap() - 0.9).abs() < 1e-6);
        let (c, s) = (0.6, 0.8);
        let rot = Matrix::from_rows(&[[c, -s], [s, c]]).unwrap();
        assert!((operator_norm(&rot).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(operator_norm(&Matrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_when_start_vector_is_in_null_space() {
        // all-ones lies in the kernel; the true norm is 2
        let m = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        assert!((operator_norm(&m).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn projection_cases() {
        let half = Matrix::identity(3).scaled(0.5);
        assert_eq!(project_contractive(&half, 1e-3).unwrap(), half);
        let two = Matrix::identity(3).scaled(2.0);
        let p = project_contractive(&two, 1e-3).unwrap();
        assert!(p.max_abs_diff(&Matrix::identity(3).scaled(0.999)) < 1e-12);
        assert_eq!(project_contractive(&p, 1e-3).unwrap(), p);
        assert!(project_contractive(&two, 0.0).is_err());
        assert!(project_contractive(&two, 1.0).is_err());
    }
}
