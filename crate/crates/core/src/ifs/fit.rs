//! Inverse problem: find a contractive `φ(v) = M·v + t` and an iteration
//! count `k` such that `φᵏ(h₀(pⱼ)) ≈ h_l(pⱼ)` for every prompt `j`.
//!
//! For each candidate `k` the map starts from the ridge least-squares
//! one-step fit, projected onto the contractive set. For `k > 1` it is then
//! refined by projected gradient descent on the mean squared Euclidean
//! error. The candidate with the lowest mean Euclidean residual wins, ties
//! going to the smaller `k`.

use alloc::vec;
use alloc::vec::Vec;

use super::map::{fixed_point, project_contractive, AffineMap};
use crate::attractor::cosine_distance;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, euclidean_distance, Matrix};

const RIDGE: f64 = 1e-6;
const INITIAL_STEP: f64 = 1e-2;
const MAX_STEPS: usize = 2000;
const RELATIVE_DECREASE_TOL: f64 = 1e-8;
// below this the step has underflowed to irrelevance
const MIN_STEP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Largest iteration count tried.
    pub k_max: usize,
    /// Contractivity margin: fitted maps have operator norm at most `1 − epsilon`.
    pub epsilon: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            k_max: 8,
            epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub map: AffineMap,
    pub iter: usize,
    /// Mean of `per_prompt_residuals`.
    pub residual: f64,
    /// `‖h_l(pⱼ) − φᵏ(h₀(pⱼ))‖` per prompt.
    pub per_prompt_residuals: Vec<f64>,
    /// Mean cosine distance between observed and predicted states; `None`
    /// if any of them is the zero vector.
    pub cosine_residual: Option<f64>,
    pub fixed_point: Vec<f64>,
    /// Fewer prompts than `d + 1`: the map is not identified by the data.
    pub underdetermined: bool,
    /// Accepted gradient steps (0 for `iter = 1`).
    pub refinement_steps: usize,
}

/// Mean squared error of `φᵏ` over prompt pairs, with its analytic gradient.
pub struct Objective<'a> {
    initial: &'a Matrix,
    target: &'a Matrix,
    iter: usize,
}

impl<'a> Objective<'a> {
    pub fn new(initial: &'a Matrix, target: &'a Matrix, iter: usize) -> Result<Self> {
        check_dim(initial.rows(), target.rows())?;
        check_dim(initial.cols(), target.cols())?;
        if initial.rows() == 0 {
            return Err(Error::EmptySet);
        }
        Ok(Objective { initial, target, iter })
    }

    pub fn value(&self, matrix: &Matrix, translation: &[f64]) -> f64 {
        let d = self.initial.cols();
        let mut cur = vec![0.0; d];
        let mut next = vec![0.0; d];
        let mut total = 0.0;
        for (x, y) in self.initial.row_iter().zip(self.target.row_iter()) {
            cur.copy_from_slice(x);
            for _ in 0..self.iter {
                step(matrix, translation, &cur, &mut next);
                core::mem::swap(&mut cur, &mut next);
            }
            total += linalg::squared_distance(&cur, y);
        }
        total / self.initial.rows() as f64
    }

    /// Value and gradient with respect to `(M, t)`, by reverse accumulation
    /// through the `k` applications.
    pub fn value_and_gradient(&self, matrix: &Matrix, translation: &[f64]) -> (f64, Matrix, Vec<f64>) {
        let d = self.initial.cols();
        let n = self.initial.rows() as f64;
        let mut grad_m = Matrix::zeros(d, d);
        let mut grad_t = vec![0.0; d];
        let mut states = vec![vec![0.0; d]; self.iter + 1];
        let mut total = 0.0;
        for (x, y) in self.initial.row_iter().zip(self.target.row_iter()) {
            states[0].copy_from_slice(x);
            for i in 0..self.iter {
                let (done, rest) = states.split_at_mut(i + 1);
                step(matrix, translation, &done[i], &mut rest[0]);
            }
            let out = &states[self.iter];
            total += linalg::squared_distance(out, y);
            let mut g: Vec<f64> = out.iter().zip(y).map(|(o, t)| 2.0 * (o - t) / n).collect();
            for i in (1..=self.iter).rev() {
                let prev = &states[i - 1];
                for r in 0..d {
                    let gr = g[r];
                    if gr != 0.0 {
                        linalg::axpy(grad_m.row_mut(r), gr, prev);
                    }
                    grad_t[r] += gr;
                }
                if i > 1 {
                    g = matrix.transpose_matvec(&g).expect("square matrix");
                }
            }
        }
        (total / n, grad_m, grad_t)
    }
}

#[inline]
fn step(matrix: &Matrix, translation: &[f64], v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = linalg::dot(matrix.row(i), v) + translation[i];
    }
}

/// Convenience wrapper around [`Objective::value_and_gradient`].
pub fn objective_and_gradient(
    initial: &Matrix,
    target: &Matrix,
    matrix: &Matrix,
    translation: &[f64],
    iter: usize,
) -> Result<(f64, Matrix, Vec<f64>)> {
    check_dim(initial.cols(), matrix.cols())?;
    check_dim(matrix.rows(), translation.len())?;
    Ok(Objective::new(initial, target, iter)?.value_and_gradient(matrix, translation))
}

/// Ridge least squares for `target ≈ M·initial + t`.
fn one_step_fit(initial: &Matrix, target: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let d = initial.cols();
    let p = d + 1;
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = Matrix::zeros(p, d);
    let mut z = vec![0.0; p];
    for (x, y) in initial.row_iter().zip(target.row_iter()) {
        z[..d].copy_from_slice(x);
        z[d] = 1.0;
        for i in 0..p {
            let zi = z[i];
            linalg::axpy(gram.row_mut(i), zi, &z);
            linalg::axpy(rhs.row_mut(i), zi, y);
        }
    }
    for i in 0..p {
        gram[(i, i)] += RIDGE;
    }
    let w = linalg::solve(&gram, &rhs)?;
    let mut m = Matrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = w[(c, r)];
        }
    }
    Ok((m, w.row(d).to_vec()))
}

fn validate_pair(initial: &Matrix, target: &Matrix) -> Result<()> {
    check_dim(initial.cols(), target.cols())?;
    check_dim(initial.rows(), target.rows())?;
    if initial.rows() == 0 || initial.cols() == 0 {
        return Err(Error::EmptySet);
    }
    if !initial.is_finite() {
        return Err(Error::NonFiniteInput("initial states"));
    }
    if !target.is_finite() {
        return Err(Error::NonFiniteInput("target states"));
    }
    Ok(())
}

/// Fits the map for one fixed iteration count.
pub fn fit_candidate(initial: &Matrix, target: &Matrix, iter: usize, epsilon: f64) -> Result<FitResult> {
    validate_pair(initial, target)?;
    if iter == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let (m0, t0) = one_step_fit(initial, target)?;
    let mut matrix = project_contractive(&m0, epsilon)?;
    let mut translation = t0;
    let mut steps = 0;

    if iter > 1 {
        let objective = Objective::new(initial, target, iter)?;
        let (mut loss, mut grad_m, mut grad_t) = objective.value_and_gradient(&matrix, &translation);
        let mut lr = INITIAL_STEP;
        while steps < MAX_STEPS && loss > 0.0 {
            let mut accepted = None;
            while lr >= MIN_STEP {
                let mut cand_m = matrix.clone();
                linalg::axpy(cand_m.as_mut_slice(), -lr, grad_m.as_slice());
                let cand_m = project_contractive(&cand_m, epsilon)?;
                let mut cand_t = translation.clone();
                linalg::axpy(&mut cand_t, -lr, &grad_t);
                let cand_loss = objective.value(&cand_m, &cand_t);
                if cand_loss < loss {
                    accepted = Some((cand_m, cand_t, cand_loss));
                    break;
                }
                lr *= 0.5;
            }
            let Some((m, t, new_loss)) = accepted else {
                break;
            };
            steps += 1;
            let relative = (loss - new_loss) / loss;
            matrix = m;
            translation = t;
            (loss, grad_m, grad_t) = objective.value_and_gradient(&matrix, &translation);
            if relative < RELATIVE_DECREASE_TOL {
                break;
            }
        }
    }

    let map = AffineMap::new(matrix, translation)?;
    let fixed_point = fixed_point(&map)?;
    let d = initial.cols();
    let mut predicted = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut per_prompt_residuals = Vec::with_capacity(initial.rows());
    let mut cosine_total = Some(0.0);
    for (x, y) in initial.row_iter().zip(target.row_iter()) {
        predicted.copy_from_slice(x);
        for _ in 0..iter {
            map.apply_into(&predicted, &mut next);
            core::mem::swap(&mut predicted, &mut next);
        }
        per_prompt_residuals.push(euclidean_distance(y, &predicted));
        cosine_total = match (cosine_total, cosine_distance(y, &predicted)) {
            (Some(acc), Ok(c)) => Some(acc + c),
            _ => None,
        };
    }
    let n = initial.rows() as f64;
    let residual = per_prompt_residuals.iter().sum::<f64>() / n;
    Ok(FitResult {
        map,
        iter,
        residual,
        per_prompt_residuals,
        cosine_residual: cosine_total.map(|c| c / n),
        fixed_point,
        underdetermined: initial.rows() < d + 1,
        refinement_steps: steps,
    })
}

/// Lowest residual wins; equal residuals go to the smaller iteration count.
pub fn select_fit(mut candidates: Vec<FitResult>) -> Result<FitResult> {
    candidates.sort_by_key(|c| c.iter);
    let mut best: Option<FitResult> = None;
    for c in candidates {
        if !c.residual.is_finite() {
            continue;
        }
        match &best {
            Some(b) if c.residual >= b.residual => {}
            _ => best = Some(c),
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no finite candidate fit".into()))
}

/// Tries every iteration count in `1..=k_max` and keeps the best fit.
pub fn fit_affine_ifs(initial: &Matrix, target: &Matrix, opts: FitOptions) -> Result<FitResult> {
    validate_pair(initial, target)?;
    if opts.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let candidates = (1..=opts.k_max)
        .map(|k| fit_candidate(initial, target, k, opts.epsilon))
        .collect::<Result<Vec<_>>>()?;
    select_fit(candidates)
}
