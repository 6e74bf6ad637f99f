//! Classical sparse-recovery baselines.

mod group_lasso;
mod omp;
pub(crate) mod problem;
pub(crate) mod sp;

pub use group_lasso::{
    block_soft_threshold, group_lasso, group_lasso_objective, group_lasso_path,
    group_lasso_with_trace, lipschitz_constant, GroupLassoTrace, SUPPORT_RELATIVE_THRESHOLD,
};
pub use omp::{omp, somp};
pub use problem::{MmvProblem, RecoveryResult, StoppingRule};
pub use sp::{simultaneous_subspace_pursuit, subspace_pursuit};

pub(crate) use problem::scatter_rows;
