use crate::classic::{scatter_rows, MmvProblem, RecoveryResult, StoppingRule};
use crate::dnn::scorer::{check_dims, BlockScorer};
use crate::error::Result;
use crate::numerics::{argmax_where, dot, lstsq, norm2, stack_rows, Mat};

/// How the coefficients are refit after a block is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BlockRefit {
    /// Least squares over every chosen block (block OMP).
    #[default]
    Accumulated,
    /// Least squares of the current residual on the new block only; earlier
    /// blocks are never revised.
    SingleBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct AlgorithmOneOptions {
    pub refit: BlockRefit,
}

/// Network-guided block pursuit on the block-sparse system
/// `vec(Yᵀ) = (A ⊗ I_K) vec(Xᵀ)`.
///
/// Each iteration feeds the stacked residual to `scorer`, picks the block of
/// the output with the largest ℓ₂ norm among the blocks not chosen yet, refits
/// and recomputes the residual. Runs until `‖R‖_F <= γ`, `k` blocks are
/// chosen, or `max_iterations`. A zero measurement returns the zero estimate
/// without consulting the network.
pub fn algorithm_one(
    problem: &MmvProblem,
    scorer: &dyn BlockScorer,
    stop: &StoppingRule,
    options: AlgorithmOneOptions,
) -> Result<RecoveryResult> {
    let a = &problem.a;
    let y = &problem.y;
    let (n, k_vec) = (problem.n(), problem.num_vectors());
    check_dims(
        "algorithm_one network",
        scorer.dims(),
        (problem.m() * k_vec, n * k_vec),
    )?;

    let y_norm = y.frobenius_norm();
    if y_norm <= stop.residual_threshold {
        return Ok(RecoveryResult::zero(n, k_vec, y_norm));
    }

    let mut residual = y.clone();
    let mut residual_norm = y_norm;
    let mut history = vec![y_norm];
    let mut chosen: Vec<usize> = Vec::new();
    let mut x_hat = Mat::zeros(n, k_vec);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if residual_norm <= stop.residual_threshold || chosen.len() == problem.k {
            converged = true;
            break;
        }
        if iterations == stop.max_iterations {
            break;
        }
        let out = scorer.score(stack_rows(&residual).as_slice())?;
        let block_norms: Vec<f64> = out.chunks_exact(k_vec).map(norm2).collect();
        let Some(b) = argmax_where(&block_norms, |i| !chosen.contains(&i)) else {
            converged = true;
            break;
        };
        chosen.push(b);
        iterations += 1;

        match options.refit {
            BlockRefit::Accumulated => {
                let mut support = chosen.clone();
                support.sort_unstable();
                let a_s = a.select_columns(&support);
                let coef = lstsq(&a_s, y)?;
                residual = y.sub(&a_s.matmul(&coef)?)?;
                x_hat = scatter_rows(n, &support, &coef);
            }
            BlockRefit::SingleBlock => {
                let col = a.column(b);
                let energy = dot(&col, &col);
                for j in 0..k_vec {
                    let r_j = residual.column(j);
                    let c = dot(&col, &r_j) / energy;
                    x_hat[(b, j)] = c;
                    for (i, &ai) in col.iter().enumerate() {
                        residual[(i, j)] -= c * ai;
                    }
                }
            }
        }
        residual_norm = residual.frobenius_norm();
        history.push(residual_norm);
    }

    let mut support = chosen;
    support.sort_unstable();
    Ok(RecoveryResult {
        x_hat,
        support: vec![support; k_vec],
        residual_norm_history: history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::scorer::OracleBlockScorer;
    use crate::error::Error;

    struct Panicking;

    impl BlockScorer for Panicking {
        fn dims(&self) -> (usize, usize) {
            (6, 8)
        }

        fn score(&self, _: &[f64]) -> Result<Vec<f64>> {
            panic!("network must not be consulted for y = 0")
        }
    }

    #[test]
    fn zero_measurement_skips_network() {
        let p = MmvProblem::new(
            Mat::from_fn(3, 4, |i, j| (i + 2 * j + 1) as f64),
            Mat::zeros(3, 2),
            1,
        )
        .unwrap();
        let stop = StoppingRule::noiseless(&p.y, 10);
        let r = algorithm_one(&p, &Panicking, &stop, AlgorithmOneOptions::default()).unwrap();
        assert_eq!(r.x_hat, Mat::zeros(4, 2));
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = MmvProblem::new(Mat::identity(3), Mat::zeros(3, 2), 1).unwrap();
        let oracle = OracleBlockScorer {
            x_true: Mat::zeros(3, 1),
            m: 3,
        };
        let stop = StoppingRule::noiseless(&p.y, 10);
        let err = algorithm_one(&p, &oracle, &stop, AlgorithmOneOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
