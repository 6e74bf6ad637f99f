use crate::classic::sp::{check_union_fits, init_column, update_column, ColumnState};
use crate::classic::{scatter_rows, MmvProblem, RecoveryResult, StoppingRule};
use crate::dnn::scorer::{check_dims, SequenceScorer};
use crate::error::Result;
use crate::numerics::{norm2, Mat};

/// Whether the network's hidden state flows from column to column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HiddenStateMode {
    /// Carried across the `K` columns of one sweep, reset between sweeps.
    #[default]
    CarryAcrossColumns,
    /// Reset before every column.
    ResetPerColumn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct AlgorithmTwoOptions {
    pub hidden: HiddenStateMode,
}

fn frobenius(states: &[ColumnState]) -> f64 {
    let all: Vec<f64> = states
        .iter()
        .flat_map(|s| s.residual.iter().copied())
        .collect();
    norm2(&all)
}

/// Subspace pursuit with network-proposed candidates, run per column.
///
/// Each column starts from the `k` largest `|aᵀy|` and its projection
/// residual. A sweep passes the residual columns through `scorer` in order;
/// for column `j` the `k` largest `|v|` are merged with the current support,
/// the union is refit, pruned back to the `k` largest coefficients and refit.
/// A column whose residual would not strictly decrease keeps its support and
/// stops updating. The loop ends when `‖R‖_F <= γ`, when a sweep improves no
/// column, or after `max_iterations` sweeps.
pub fn algorithm_two(
    problem: &MmvProblem,
    scorer: &dyn SequenceScorer,
    stop: &StoppingRule,
    options: AlgorithmTwoOptions,
) -> Result<RecoveryResult> {
    check_union_fits(problem)?;
    check_dims(
        "algorithm_two network",
        scorer.dims(),
        (problem.m(), problem.n()),
    )?;
    let a = &problem.a;
    let (n, k_vec, k) = (problem.n(), problem.num_vectors(), problem.k);
    let y_norm = problem.y.frobenius_norm();
    if y_norm <= stop.residual_threshold {
        return Ok(RecoveryResult::zero(n, k_vec, y_norm));
    }

    let columns: Vec<Vec<f64>> = (0..k_vec).map(|j| problem.y.column(j)).collect();
    let mut states = columns
        .iter()
        .map(|y| init_column(a, y, k))
        .collect::<Result<Vec<_>>>()?;
    let mut active = vec![true; k_vec];
    let mut residual_norm = frobenius(&states);
    let mut history = vec![residual_norm];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if residual_norm <= stop.residual_threshold {
            converged = true;
            break;
        }
        if iterations == stop.max_iterations {
            break;
        }
        let mut hidden = scorer.begin_sweep();
        let mut improved = false;
        for j in 0..k_vec {
            if options.hidden == HiddenStateMode::ResetPerColumn {
                hidden = scorer.begin_sweep();
            }
            let scores = scorer.score(&mut hidden, j, &states[j].residual)?;
            if !active[j] {
                continue;
            }
            let next = update_column(a, &columns[j], &states[j], &scores, k)?;
            if next.residual_norm < states[j].residual_norm {
                states[j] = next;
                improved = true;
            } else {
                active[j] = false;
            }
        }
        iterations += 1;
        if !improved {
            converged = true;
            break;
        }
        residual_norm = frobenius(&states);
        history.push(residual_norm);
    }

    let mut x_hat = Mat::zeros(n, k_vec);
    for (j, s) in states.iter().enumerate() {
        let col = scatter_rows(n, &s.support, &Mat::column_vector(s.coef.clone()));
        x_hat.set_column(j, &col.column(0));
    }
    Ok(RecoveryResult {
        x_hat,
        support: states.into_iter().map(|s| s.support).collect(),
        residual_norm_history: history,
        iterations,
        converged,
    })
}
