use crate::classic::{
    group_lasso_path, simultaneous_subspace_pursuit, somp, MmvProblem, RecoveryResult, StoppingRule,
};
use crate::dnn::{
    algorithm_one, algorithm_two, AlgorithmOneOptions, AlgorithmTwoOptions, MlpScorer, RnnScorer,
};
use crate::error::{Error, Result};
use crate::mimo::scene::{nmse, ChannelScene, CsForm};
use crate::neural::{MlpParams, RnnParams};
use crate::numerics::{lstsq, CMat, Mat};

/// Solver used to recover the angular channel from the real-stacked system.
#[derive(Clone, Debug)]
pub enum ChannelSolver<'a> {
    Somp,
    /// Joint-support subspace pursuit.
    SubspacePursuit,
    /// Group LASSO over `λ = f·max_i ‖(AᵀY)_i‖` for each fraction `f`, keeping
    /// the λ with the lowest NMSE against the true channel (oracle tuning).
    /// The grid is solved from the largest λ down with warm starts.
    GroupLasso {
        lambda_fractions: Vec<f64>,
        iterations: usize,
    },
    AlgorithmOne {
        mlp: &'a MlpParams,
        options: AlgorithmOneOptions,
    },
    AlgorithmTwo {
        rnn: &'a RnnParams,
        options: AlgorithmTwoOptions,
    },
    /// Least squares on the true support (a lower bound, not a solver).
    OracleLs,
}

impl ChannelSolver<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelSolver::Somp => "somp",
            ChannelSolver::SubspacePursuit => "sp",
            ChannelSolver::GroupLasso { .. } => "glasso",
            ChannelSolver::AlgorithmOne { .. } => "alg1",
            ChannelSolver::AlgorithmTwo { .. } => "alg2",
            ChannelSolver::OracleLs => "oracle_ls",
        }
    }
}

/// Residual threshold γ for channel recovery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaPolicy {
    /// `√(mK)·σ` of the real-stacked noise when the scene is noisy,
    /// `1e-6·‖Y‖_F` when it is noiseless.
    Auto,
    /// `γ = c·‖Y‖_F`.
    Relative(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub gamma: GammaPolicy,
    pub max_iterations: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            gamma: GammaPolicy::Auto,
            max_iterations: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChannelEstimate {
    pub h_hat: CMat,
    pub nmse: f64,
    pub iterations: usize,
    /// The λ picked by oracle tuning (group LASSO only).
    pub lambda: Option<f64>,
}

/// The real-stacked recovery problem of a scene: `2T x 2M` sensing matrix,
/// `2T x N` measurements and row sparsity `2·|support|` bound `2·sparsity`.
pub fn real_problem(cs: &CsForm, sparsity: usize) -> Result<MmvProblem> {
    MmvProblem::new(cs.a_real(), cs.y_real(), 2 * sparsity)
}

pub fn stopping_rule(
    scene: &ChannelScene,
    problem: &MmvProblem,
    cfg: &EstimateConfig,
) -> StoppingRule {
    match cfg.gamma {
        GammaPolicy::Auto if scene.noise_variance > 0.0 => StoppingRule::noise_level(
            problem.m(),
            problem.num_vectors(),
            (scene.noise_variance / 2.0).sqrt(),
            cfg.max_iterations,
        ),
        GammaPolicy::Auto => StoppingRule::noiseless(&problem.y, cfg.max_iterations),
        GammaPolicy::Relative(c) => StoppingRule {
            residual_threshold: c * problem.y.frobenius_norm(),
            max_iterations: cfg.max_iterations.max(1),
        },
    }
}

fn channel_from_real(scene: &ChannelScene, x_real: &Mat) -> Result<CMat> {
    scene.channel_from_angular(&CMat::unstack_columns(x_real)?)
}

/// Recovers `Ĥ` with `solver` on the real-stacked form of `scene` and scores
/// it by NMSE. `sparsity` is the `k` handed to the solvers (in complex bins).
pub fn estimate_channel(
    scene: &ChannelScene,
    solver: &ChannelSolver<'_>,
    sparsity: usize,
    cfg: &EstimateConfig,
) -> Result<ChannelEstimate> {
    let cs = scene.to_cs_form()?;
    let problem = real_problem(&cs, sparsity)?;
    let stop = stopping_rule(scene, &problem, cfg);
    let finish = |r: RecoveryResult, lambda: Option<f64>| -> Result<ChannelEstimate> {
        let h_hat = channel_from_real(scene, &r.x_hat)?;
        let nmse = nmse(&h_hat, &scene.h)?;
        Ok(ChannelEstimate {
            h_hat,
            nmse,
            iterations: r.iterations,
            lambda,
        })
    };
    match solver {
        ChannelSolver::Somp => finish(somp(&problem, &stop)?, None),
        ChannelSolver::SubspacePursuit => {
            finish(simultaneous_subspace_pursuit(&problem, &stop)?, None)
        }
        ChannelSolver::AlgorithmOne { mlp, options } => finish(
            algorithm_one(&problem, &MlpScorer { params: mlp }, &stop, *options)?,
            None,
        ),
        ChannelSolver::AlgorithmTwo { rnn, options } => finish(
            algorithm_two(&problem, &RnnScorer { params: rnn }, &stop, *options)?,
            None,
        ),
        ChannelSolver::GroupLasso {
            lambda_fractions,
            iterations,
        } => {
            if lambda_fractions.is_empty() {
                return Err(Error::invalid("group lasso needs a non-empty lambda grid"));
            }
            let lambda_max = problem
                .a
                .t_matmul(&problem.y)?
                .row_norms()
                .into_iter()
                .fold(0.0, f64::max);
            // Largest λ first, so each solve warm-starts the next.
            let mut fractions = lambda_fractions.clone();
            fractions.sort_by(|a, b| b.total_cmp(a));
            let lambdas: Vec<f64> = fractions.iter().map(|f| f * lambda_max).collect();
            let path = group_lasso_path(&problem, &lambdas, *iterations)?;
            let mut best: Option<ChannelEstimate> = None;
            for (r, &lambda) in path.into_iter().zip(&lambdas) {
                let est = finish(r, Some(lambda))?;
                if best.as_ref().map_or(true, |b| est.nmse < b.nmse) {
                    best = Some(est);
                }
            }
            Ok(best.expect("grid is non-empty"))
        }
        ChannelSolver::OracleLs => {
            let m_tx = scene.m_tx();
            let support: Vec<usize> = scene
                .support
                .iter()
                .copied()
                .chain(scene.support.iter().map(|i| i + m_tx))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let coef = lstsq(&problem.a.select_columns(&support), &problem.y)?;
            let mut x = Mat::zeros(problem.n(), problem.num_vectors());
            for (r, &i) in support.iter().enumerate() {
                x.row_mut(i).copy_from_slice(coef.row(r));
            }
            let h_hat = channel_from_real(scene, &x)?;
            let nmse = nmse(&h_hat, &scene.h)?;
            Ok(ChannelEstimate {
                h_hat,
                nmse,
                iterations: 1,
                lambda: None,
            })
        }
    }
}
