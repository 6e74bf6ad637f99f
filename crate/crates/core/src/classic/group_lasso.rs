//! Group LASSO (row-sparse ℓ₂,₁ penalty) by FISTA with adaptive restart.
//!
//! Minimizes `½‖Y − AX‖_F² + λ Σᵢ ‖xⁱ‖₂` where `xⁱ` is row `i` of `X`.

use crate::classic::problem::{MmvProblem, RecoveryResult};
use crate::error::{Error, Result};
use crate::numerics::{norm2, Mat};

/// Rows whose norm is at most this fraction of the largest are reported as
/// off-support and zeroed.
pub const SUPPORT_RELATIVE_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GroupLassoTrace {
    /// Objective after every accepted iteration (starting with the initial point).
    pub objective_history: Vec<f64>,
    /// Objective value at each point where momentum was reset.
    pub restart_objectives: Vec<f64>,
    pub lipschitz: f64,
}

/// Largest eigenvalue of `AᵀA` by power iteration.
pub fn lipschitz_constant(a: &Mat) -> Result<f64> {
    let n = a.cols();
    let mut v = Mat::column_vector(vec![1.0 / (n as f64).sqrt(); n]);
    let mut estimate = 0.0;
    for _ in 0..1000 {
        let w = a.t_matmul(&a.matmul(&v)?)?;
        let norm = w.frobenius_norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm;
        v = w.scale(1.0 / norm);
        if (next - estimate).abs() <= 1e-13 * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    Ok(estimate)
}

pub fn group_lasso_objective(a: &Mat, y: &Mat, x: &Mat, lambda: f64) -> Result<f64> {
    let r = y.sub(&a.matmul(x)?)?;
    let fit = 0.5 * r.frobenius_norm().powi(2);
    let penalty: f64 = x.row_norms().iter().sum();
    Ok(fit + lambda * penalty)
}

/// Row-wise block soft-thresholding: `xⁱ ← max(0, 1 − τ/‖xⁱ‖)·xⁱ`.
pub fn block_soft_threshold(x: &mut Mat, tau: f64) {
    for i in 0..x.rows() {
        let row = x.row_mut(i);
        let norm = norm2(row);
        let shrink = if norm > tau { 1.0 - tau / norm } else { 0.0 };
        row.iter_mut().for_each(|v| *v *= shrink);
    }
}

pub fn group_lasso(
    problem: &MmvProblem,
    lambda: f64,
    fista_iters: usize,
) -> Result<RecoveryResult> {
    group_lasso_with_trace(problem, lambda, fista_iters, None).map(|(r, _)| r)
}

/// FISTA with function-value restart: whenever a step would raise the
/// objective, momentum is reset and the step is retaken from the last
/// accepted point, so accepted objectives never increase.
pub fn group_lasso_with_trace(
    problem: &MmvProblem,
    lambda: f64,
    fista_iters: usize,
    warm_start: Option<&Mat>,
) -> Result<(RecoveryResult, GroupLassoTrace)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "group lasso needs lambda > 0, got {lambda}"
        )));
    }
    let lipschitz = lipschitz_constant(&problem.a)? * (1.0 + 1e-9);
    fista(problem, lambda, fista_iters, warm_start, lipschitz)
}

/// Solves along a sequence of λ values, warm-starting each solve from the
/// previous solution and sharing one Lipschitz estimate. Pass the λ values
/// in decreasing order for the usual continuation path.
pub fn group_lasso_path(
    problem: &MmvProblem,
    lambdas: &[f64],
    fista_iters: usize,
) -> Result<Vec<RecoveryResult>> {
    let lipschitz = lipschitz_constant(&problem.a)? * (1.0 + 1e-9);
    let mut out: Vec<RecoveryResult> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let warm = out.last().map(|r| r.x_hat.clone());
        let (r, _) = fista(problem, lambda, fista_iters, warm.as_ref(), lipschitz)?;
        out.push(r);
    }
    Ok(out)
}

fn fista(
    problem: &MmvProblem,
    lambda: f64,
    fista_iters: usize,
    warm_start: Option<&Mat>,
    lipschitz: f64,
) -> Result<(RecoveryResult, GroupLassoTrace)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "group lasso needs lambda > 0, got {lambda}"
        )));
    }
    let a = &problem.a;
    let y = &problem.y;
    let (n, k_vec) = (problem.n(), problem.num_vectors());
    let step = 1.0 / lipschitz;

    let mut x = match warm_start {
        Some(w) if w.shape() == (n, k_vec) => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                op: "group_lasso warm start",
                left: (n, k_vec),
                right: w.shape(),
            })
        }
        None => Mat::zeros(n, k_vec),
    };
    let mut z = x.clone();
    // A·x and A·z are tracked alongside x and z, so each iteration costs
    // one product with A and one with Aᵀ.
    let mut ax = a.matmul(&x)?;
    let mut az = ax.clone();
    let mut t = 1.0_f64;
    let mut objective = group_lasso_objective(a, y, &x, lambda)?;
    let mut objective_history = vec![objective];
    let mut restart_objectives = Vec::new();
    let mut residual_history = vec![y.sub(&ax)?.frobenius_norm()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < fista_iters {
        iterations += 1;
        let grad = a.t_matmul(&az.sub(y)?)?;
        let mut candidate = z.sub(&grad.scale(step))?;
        block_soft_threshold(&mut candidate, lambda * step);
        let ac = a.matmul(&candidate)?;
        let residual = y.sub(&ac)?;
        let rn = residual.frobenius_norm();
        let cand_obj = 0.5 * rn * rn + lambda * candidate.row_norms().iter().sum::<f64>();
        if !cand_obj.is_finite() {
            return Err(Error::NonFinite("group_lasso"));
        }

        if cand_obj > objective && t > 1.0 {
            restart_objectives.push(objective);
            t = 1.0;
            z = x.clone();
            az = ax.clone();
            continue;
        }

        let change = candidate.sub(&x)?.frobenius_norm();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        z = candidate.add(&candidate.sub(&x)?.scale(momentum))?;
        az = ac.add(&ac.sub(&ax)?.scale(momentum))?;
        x = candidate;
        ax = ac;
        t = t_next;
        objective = cand_obj;
        objective_history.push(objective);
        residual_history.push(rn);

        if change <= 1e-13 * x.frobenius_norm().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let row_norms = x.row_norms();
    let max_row = row_norms.iter().cloned().fold(0.0, f64::max);
    let mut support = Vec::new();
    for (i, &norm) in row_norms.iter().enumerate() {
        if max_row > 0.0 && norm > SUPPORT_RELATIVE_THRESHOLD * max_row {
            support.push(i);
        } else {
            x.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
        }
    }
    let final_residual = y.sub(&a.matmul(&x)?)?.frobenius_norm();
    residual_history.push(final_residual);

    Ok((
        RecoveryResult {
            x_hat: x,
            support: vec![support; k_vec],
            residual_norm_history: residual_history,
            iterations,
            converged,
        },
        GroupLassoTrace {
            objective_history,
            restart_objectives,
            lipschitz,
        },
    ))
}
