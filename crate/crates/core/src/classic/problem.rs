use crate::error::{Error, Result};
use crate::numerics::Mat;

/// A jointly sparse recovery instance `Y = A·X` with `X` at most `k`-row-sparse.
#[derive(Clone, Debug)]
pub struct MmvProblem {
    pub a: Mat,
    pub y: Mat,
    pub k: usize,
}

impl MmvProblem {
    pub fn new(a: Mat, y: Mat, k: usize) -> Result<Self> {
        if a.rows() != y.rows() {
            return Err(Error::DimensionMismatch {
                op: "MmvProblem::new",
                left: a.shape(),
                right: y.shape(),
            });
        }
        if k == 0 || k > a.rows() || k > a.cols() {
            return Err(Error::invalid(format!(
                "sparsity k = {k} must satisfy 1 <= k <= min(m, n) = {}",
                a.rows().min(a.cols())
            )));
        }
        if y.cols() == 0 {
            return Err(Error::invalid("measurement matrix has no columns"));
        }
        if let Some(j) = a.column_norms().iter().position(|&c| c == 0.0) {
            return Err(Error::invalid(format!("sensing matrix column {j} is zero")));
        }
        if !a.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite("MmvProblem::new"));
        }
        Ok(MmvProblem { a, y, k })
    }

    /// Measurement dimension `m`.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Signal dimension `n`.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Number of measurement vectors `K`.
    pub fn num_vectors(&self) -> usize {
        self.y.cols()
    }

    pub(crate) fn require_single_vector(&self, solver: &str) -> Result<()> {
        if self.num_vectors() != 1 {
            return Err(Error::invalid(format!(
                "{solver} expects a single measurement vector, got K = {}",
                self.num_vectors()
            )));
        }
        Ok(())
    }
}

/// Loop guard shared by every iterative solver: stop once `‖R‖_F <= γ` or
/// after `max_iterations` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub residual_threshold: f64,
    pub max_iterations: usize,
}

impl StoppingRule {
    pub fn new(residual_threshold: f64, max_iterations: usize) -> Result<Self> {
        if !(residual_threshold >= 0.0) || !residual_threshold.is_finite() {
            return Err(Error::invalid(format!(
                "residual threshold must be finite and >= 0, got {residual_threshold}"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(StoppingRule {
            residual_threshold,
            max_iterations,
        })
    }

    /// `γ = 1e-6 · ‖Y‖_F`, for noiseless problems.
    pub fn noiseless(y: &Mat, max_iterations: usize) -> Self {
        StoppingRule {
            residual_threshold: 1e-6 * y.frobenius_norm(),
            max_iterations: max_iterations.max(1),
        }
    }

    /// `γ = √(m·K) · σ` where `σ` is the per-entry noise standard deviation.
    pub fn noise_level(m: usize, k_vectors: usize, sigma: f64, max_iterations: usize) -> Self {
        StoppingRule {
            residual_threshold: ((m * k_vectors) as f64).sqrt() * sigma,
            max_iterations: max_iterations.max(1),
        }
    }
}

/// Output shared by every solver.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// `n x K` estimate. Rows outside `support` are exactly zero.
    pub x_hat: Mat,
    /// Sorted support per measurement column. Joint solvers repeat one set.
    pub support: Vec<Vec<usize>>,
    /// `‖R‖_F` at initialization and after every accepted iteration; the last
    /// entry is the residual of `x_hat`.
    pub residual_norm_history: Vec<f64>,
    pub iterations: usize,
    /// `false` only when the iteration cap ended the loop.
    pub converged: bool,
}

impl RecoveryResult {
    pub(crate) fn zero(n: usize, k_vectors: usize, y_norm: f64) -> Self {
        RecoveryResult {
            x_hat: Mat::zeros(n, k_vectors),
            support: vec![Vec::new(); k_vectors],
            residual_norm_history: vec![y_norm],
            iterations: 0,
            converged: true,
        }
    }

    /// Union of the per-column supports.
    pub fn joint_support(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.support.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn final_residual_norm(&self) -> f64 {
        *self.residual_norm_history.last().unwrap_or(&f64::NAN)
    }
}

/// Scatters `rows_values` (`|support| x K`) into an `n x K` matrix.
pub(crate) fn scatter_rows(n: usize, support: &[usize], rows_values: &Mat) -> Mat {
    let mut x = Mat::zeros(n, rows_values.cols());
    for (r, &i) in support.iter().enumerate() {
        x.row_mut(i).copy_from_slice(rows_values.row(r));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_validation() {
        let a = Mat::identity(3);
        assert!(MmvProblem::new(a.clone(), Mat::zeros(3, 2), 2).is_ok());
        assert!(MmvProblem::new(a.clone(), Mat::zeros(4, 2), 2).is_err());
        assert!(MmvProblem::new(a.clone(), Mat::zeros(3, 2), 4).is_err());
        assert!(MmvProblem::new(a.clone(), Mat::zeros(3, 2), 0).is_err());
        let mut z = a.clone();
        z[(1, 1)] = 0.0;
        assert!(MmvProblem::new(z, Mat::zeros(3, 1), 1).is_err());
    }

    #[test]
    fn stopping_rule_validation() {
        assert!(StoppingRule::new(-1.0, 5).is_err());
        assert!(StoppingRule::new(0.0, 0).is_err());
        assert!(StoppingRule::new(f64::NAN, 3).is_err());
        let s = StoppingRule::noise_level(4, 4, 0.5, 10);
        assert_eq!(s.residual_threshold, 2.0);
    }
}
