use crate::classic::sp::correlate;
use crate::error::{Error, Result};
use crate::neural::{mlp_forward, scale_to_unit_rms, MlpParams, RnnParams};
use crate::numerics::{stack_rows, Mat};

/// Maps a stacked residual `vec(Rᵀ)` (length `m·K`) to a stacked score vector
/// (length `n·K`) whose block norms rank the candidate rows.
pub trait BlockScorer {
    /// `(input length, output length)`.
    fn dims(&self) -> (usize, usize);
    fn score(&self, residual_stacked: &[f64]) -> Result<Vec<f64>>;
}

/// Maps one residual column (length `m`) to an `n`-length score vector,
/// threading a hidden state across the columns of a sweep.
pub trait SequenceScorer {
    fn dims(&self) -> (usize, usize);
    /// Hidden state at the start of a sweep (or of a column, in reset mode).
    fn begin_sweep(&self) -> Vec<f64>;
    fn score(&self, hidden: &mut Vec<f64>, column: usize, residual: &[f64]) -> Result<Vec<f64>>;
}

/// The four-layer MLP applied to the unit-RMS residual.
#[derive(Clone, Debug)]
pub struct MlpScorer<'a> {
    pub params: &'a MlpParams,
}

impl BlockScorer for MlpScorer<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.params.d_in(), self.params.d_out())
    }

    fn score(&self, residual_stacked: &[f64]) -> Result<Vec<f64>> {
        Ok(
            mlp_forward(self.params, &scale_to_unit_rms(residual_stacked))?
                .output()
                .to_vec(),
        )
    }
}

/// The RNN applied to unit-RMS residual columns; the hidden state starts at
/// zero.
#[derive(Clone, Debug)]
pub struct RnnScorer<'a> {
    pub params: &'a RnnParams,
}

impl SequenceScorer for RnnScorer<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.params.d_in(), self.params.d_out())
    }

    fn begin_sweep(&self) -> Vec<f64> {
        vec![0.0; self.params.hidden()]
    }

    fn score(&self, hidden: &mut Vec<f64>, _column: usize, residual: &[f64]) -> Result<Vec<f64>> {
        let (h, y) = self.params.step(hidden, &scale_to_unit_rms(residual))?;
        *hidden = h;
        Ok(y)
    }
}

/// `r ↦ Aᵀr`, which turns the RNN-guided pursuit back into classical
/// subspace pursuit (and, on blocks, into block OMP with `Φᵀr`).
#[derive(Clone, Debug)]
pub struct CorrelationScorer<'a> {
    pub a: &'a Mat,
    /// Block length `K` for block scoring.
    pub block: usize,
}

impl SequenceScorer for CorrelationScorer<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.a.cols())
    }

    fn begin_sweep(&self) -> Vec<f64> {
        Vec::new()
    }

    fn score(&self, _hidden: &mut Vec<f64>, _column: usize, residual: &[f64]) -> Result<Vec<f64>> {
        correlate(self.a, residual)
    }
}

impl BlockScorer for CorrelationScorer<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.a.rows() * self.block, self.a.cols() * self.block)
    }

    fn score(&self, residual_stacked: &[f64]) -> Result<Vec<f64>> {
        let r = Mat::from_vec(self.a.rows(), self.block, residual_stacked.to_vec())?;
        Ok(stack_rows(&self.a.t_matmul(&r)?).into_vec())
    }
}

/// Test stub that ignores its input and always returns the true stacked
/// signal `vec(Xᵀ)`.
#[derive(Clone, Debug)]
pub struct OracleBlockScorer {
    pub x_true: Mat,
    pub m: usize,
}

impl BlockScorer for OracleBlockScorer {
    fn dims(&self) -> (usize, usize) {
        (
            self.m * self.x_true.cols(),
            self.x_true.rows() * self.x_true.cols(),
        )
    }

    fn score(&self, _residual_stacked: &[f64]) -> Result<Vec<f64>> {
        Ok(stack_rows(&self.x_true).into_vec())
    }
}

/// Test stub that always returns the 0/1 indicator of the true support.
#[derive(Clone, Debug)]
pub struct OracleSupportScorer {
    pub support: Vec<usize>,
    pub m: usize,
    pub n: usize,
}

impl SequenceScorer for OracleSupportScorer {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn begin_sweep(&self) -> Vec<f64> {
        Vec::new()
    }

    fn score(&self, _hidden: &mut Vec<f64>, _column: usize, _residual: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.n];
        for &i in &self.support {
            v[i] = 1.0;
        }
        Ok(v)
    }
}

pub(crate) fn check_dims(
    what: &'static str,
    got: (usize, usize),
    want: (usize, usize),
) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch {
            op: what,
            left: want,
            right: got,
        });
    }
    Ok(())
}
