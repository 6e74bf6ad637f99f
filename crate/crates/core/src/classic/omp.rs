//! Orthogonal matching pursuit and its simultaneous (joint-support) variant.

use crate::classic::problem::{scatter_rows, MmvProblem, RecoveryResult, StoppingRule};
use crate::error::Result;
use crate::numerics::{argmax_where, lstsq, Mat};

/// Single-vector OMP. Identical to [`somp`] on a `K = 1` problem.
pub fn omp(problem: &MmvProblem, stop: &StoppingRule) -> Result<RecoveryResult> {
    problem.require_single_vector("omp")?;
    somp(problem, stop)
}

/// Simultaneous OMP: one shared support, atoms chosen by the ℓ₂ norm of
/// their (column-normalized) correlation with all residual columns, then a
/// least-squares refit of every column on the accumulated support.
///
/// Stops when `‖R‖_F <= γ`, when the support reaches `k`, when no unselected
/// atom correlates with the residual, or after `max_iterations`.
pub fn somp(problem: &MmvProblem, stop: &StoppingRule) -> Result<RecoveryResult> {
    let a = &problem.a;
    let y = &problem.y;
    let n = problem.n();
    let col_norms = a.column_norms();

    let y_norm = y.frobenius_norm();
    let mut history = vec![y_norm];
    let mut residual = y.clone();
    let mut residual_norm = y_norm;
    let mut chosen = vec![false; n];
    let mut support: Vec<usize> = Vec::new();
    let mut coef = Mat::zeros(0, y.cols());
    let mut iterations = 0;
    let mut converged = false;

    loop {
        if residual_norm <= stop.residual_threshold || support.len() == problem.k {
            converged = true;
            break;
        }
        if iterations == stop.max_iterations {
            break;
        }
        let scores: Vec<f64> = a
            .t_matmul(&residual)?
            .row_norms()
            .iter()
            .zip(&col_norms)
            .map(|(c, norm)| c / norm)
            .collect();
        let Some(best) = argmax_where(&scores, |i| !chosen[i]) else {
            converged = true;
            break;
        };
        if scores[best] == 0.0 {
            converged = true;
            break;
        }
        chosen[best] = true;
        let pos = support.partition_point(|&i| i < best);
        support.insert(pos, best);

        let a_s = a.select_columns(&support);
        coef = lstsq(&a_s, y)?;
        residual = y.sub(&a_s.matmul(&coef)?)?;
        residual_norm = residual.frobenius_norm();
        history.push(residual_norm);
        iterations += 1;
    }

    Ok(RecoveryResult {
        x_hat: scatter_rows(n, &support, &coef),
        support: vec![support; y.cols()],
        residual_norm_history: history,
        iterations,
        converged,
    })
}
