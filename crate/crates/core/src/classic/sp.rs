//! Subspace pursuit, single-vector and joint.
//!
//! The per-column update is shared with the RNN-guided solver in
//! [`crate::dnn`]: only the source of the candidate scores differs.

use crate::classic::problem::{scatter_rows, MmvProblem, RecoveryResult, StoppingRule};
use crate::error::{Error, Result};
use crate::numerics::{lstsq, norm2, top_k_indices, Mat};

/// One column's subspace-pursuit state: a size-`k` support, the least-squares
/// coefficients on it and the resulting residual.
#[derive(Clone, Debug)]
pub(crate) struct ColumnState {
    pub support: Vec<usize>,
    pub coef: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
}

fn fit_column(a: &Mat, y: &[f64], support: Vec<usize>) -> Result<ColumnState> {
    let a_s = a.select_columns(&support);
    let coef = lstsq(&a_s, &Mat::column_vector(y.to_vec()))?.into_vec();
    let fitted = a_s.matmul(&Mat::column_vector(coef.clone()))?;
    let residual: Vec<f64> = y
        .iter()
        .zip(fitted.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let residual_norm = norm2(&residual);
    Ok(ColumnState {
        support,
        coef,
        residual,
        residual_norm,
    })
}

/// `aᵀ r` for a single column.
pub(crate) fn correlate(a: &Mat, r: &[f64]) -> Result<Vec<f64>> {
    Ok(a.t_matmul(&Mat::column_vector(r.to_vec()))?.into_vec())
}

fn abs_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

/// Support = `k` largest `|aᵀy|`, refit, residual.
pub(crate) fn init_column(a: &Mat, y: &[f64], k: usize) -> Result<ColumnState> {
    let support = top_k_indices(&abs_all(&correlate(a, y)?), k);
    fit_column(a, y, support)
}

/// Expand by the `k` largest `|scores|`, refit on the union, prune to the `k`
/// largest coefficients, refit on the pruned support.
pub(crate) fn update_column(
    a: &Mat,
    y: &[f64],
    current: &ColumnState,
    scores: &[f64],
    k: usize,
) -> Result<ColumnState> {
    let candidates = top_k_indices(&abs_all(scores), k);
    let mut union = current.support.clone();
    union.extend(candidates);
    union.sort_unstable();
    union.dedup();

    let expanded = fit_column(a, y, union)?;
    let keep = top_k_indices(&abs_all(&expanded.coef), k);
    let pruned: Vec<usize> = keep.iter().map(|&p| expanded.support[p]).collect();
    fit_column(a, y, pruned)
}

pub(crate) fn check_union_fits(problem: &MmvProblem) -> Result<()> {
    if 2 * problem.k > problem.m() || 2 * problem.k > problem.n() {
        return Err(Error::invalid(format!(
            "subspace pursuit needs 2k <= min(m, n); k = {}, m = {}, n = {}",
            problem.k,
            problem.m(),
            problem.n()
        )));
    }
    Ok(())
}

/// Classical single-vector subspace pursuit.
///
/// Iterates until `‖r‖ <= γ`, until a step fails to strictly decrease the
/// residual (the previous support is kept), or `max_iterations` steps.
pub fn subspace_pursuit(problem: &MmvProblem, stop: &StoppingRule) -> Result<RecoveryResult> {
    problem.require_single_vector("subspace_pursuit")?;
    check_union_fits(problem)?;
    let a = &problem.a;
    let y = problem.y.as_slice();
    let y_norm = norm2(y);
    if y_norm <= stop.residual_threshold {
        return Ok(RecoveryResult::zero(problem.n(), 1, y_norm));
    }

    let mut state = init_column(a, y, problem.k)?;
    let mut history = vec![state.residual_norm];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if state.residual_norm <= stop.residual_threshold {
            converged = true;
            break;
        }
        if iterations == stop.max_iterations {
            break;
        }
        let scores = correlate(a, &state.residual)?;
        let next = update_column(a, y, &state, &scores, problem.k)?;
        iterations += 1;
        if next.residual_norm >= state.residual_norm {
            converged = true;
            break;
        }
        state = next;
        history.push(state.residual_norm);
    }

    let coef = Mat::column_vector(state.coef);
    Ok(RecoveryResult {
        x_hat: scatter_rows(problem.n(), &state.support, &coef),
        support: vec![state.support],
        residual_norm_history: history,
        iterations,
        converged,
    })
}

/// Joint subspace pursuit for MMV problems: one shared support selected and
/// pruned by row norms (of `AᵀR` and of the refit coefficients).
/// With `K = 1` it follows the same trajectory as [`subspace_pursuit`].
pub fn simultaneous_subspace_pursuit(
    problem: &MmvProblem,
    stop: &StoppingRule,
) -> Result<RecoveryResult> {
    check_union_fits(problem)?;
    let a = &problem.a;
    let y = &problem.y;
    let k = problem.k;
    let y_norm = y.frobenius_norm();
    if y_norm <= stop.residual_threshold {
        return Ok(RecoveryResult::zero(problem.n(), y.cols(), y_norm));
    }

    let fit = |support: Vec<usize>| -> Result<(Vec<usize>, Mat, Mat, f64)> {
        let a_s = a.select_columns(&support);
        let coef = lstsq(&a_s, y)?;
        let residual = y.sub(&a_s.matmul(&coef)?)?;
        let norm = residual.frobenius_norm();
        Ok((support, coef, residual, norm))
    };

    let mut state = fit(top_k_indices(&a.t_matmul(y)?.row_norms(), k))?;
    let mut history = vec![state.3];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if state.3 <= stop.residual_threshold {
            converged = true;
            break;
        }
        if iterations == stop.max_iterations {
            break;
        }
        let candidates = top_k_indices(&a.t_matmul(&state.2)?.row_norms(), k);
        let mut union = state.0.clone();
        union.extend(candidates);
        union.sort_unstable();
        union.dedup();
        let expanded = fit(union)?;
        let keep = top_k_indices(&expanded.1.row_norms(), k);
        let pruned: Vec<usize> = keep.iter().map(|&p| expanded.0[p]).collect();
        let next = fit(pruned)?;
        iterations += 1;
        if next.3 >= state.3 {
            converged = true;
            break;
        }
        state = next;
        history.push(state.3);
    }

    let (support, coef, _, _) = state;
    Ok(RecoveryResult {
        x_hat: scatter_rows(problem.n(), &support, &coef),
        support: vec![support; y.cols()],
        residual_norm_history: history,
        iterations,
        converged,
    })
}
