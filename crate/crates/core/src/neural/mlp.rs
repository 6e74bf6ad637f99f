//! Four-layer fully connected tanh network.

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::neural::params::{
    affine_batch, column_sums_into, dense_tanh, glorot, tanh_backward, tanh_in_place, ParamSet,
};
use crate::numerics::{Mat, RngState};

/// Weights `W₁ (n₁ x d_in) … W₄ (d_out x n₃)` and biases of the four layers.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
    pub w3: Mat,
    pub b3: Vec<f64>,
    pub w4: Mat,
    pub b4: Vec<f64>,
}

/// One supervised example.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Activations of the four layers for one input; `layers[3]` is the output.
#[derive(Clone, Debug)]
pub struct MlpActivations {
    pub layers: [Vec<f64>; 4],
}

impl MlpActivations {
    pub fn output(&self) -> &[f64] {
        &self.layers[3]
    }
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init(d_in: usize, hidden: [usize; 3], d_out: usize, rng: &mut RngState) -> Self {
        let [n1, n2, n3] = hidden;
        MlpParams {
            w1: glorot(rng, n1, d_in),
            b1: vec![0.0; n1],
            w2: glorot(rng, n2, n1),
            b2: vec![0.0; n2],
            w3: glorot(rng, n3, n2),
            b3: vec![0.0; n3],
            w4: glorot(rng, d_out, n3),
            b4: vec![0.0; d_out],
        }
    }

    pub fn zeros(d_in: usize, hidden: [usize; 3], d_out: usize) -> Self {
        let [n1, n2, n3] = hidden;
        MlpParams {
            w1: Mat::zeros(n1, d_in),
            b1: vec![0.0; n1],
            w2: Mat::zeros(n2, n1),
            b2: vec![0.0; n2],
            w3: Mat::zeros(n3, n2),
            b3: vec![0.0; n3],
            w4: Mat::zeros(d_out, n3),
            b4: vec![0.0; d_out],
        }
    }

    pub fn d_in(&self) -> usize {
        self.w1.cols()
    }

    pub fn d_out(&self) -> usize {
        self.w4.rows()
    }

    pub fn hidden(&self) -> [usize; 3] {
        [self.w1.rows(), self.w2.rows(), self.w3.rows()]
    }

    pub fn validate(&self) -> Result<()> {
        let chain = [
            (self.w1.shape(), self.b1.len(), None),
            (self.w2.shape(), self.b2.len(), Some(self.w1.rows())),
            (self.w3.shape(), self.b3.len(), Some(self.w2.rows())),
            (self.w4.shape(), self.b4.len(), Some(self.w3.rows())),
        ];
        for (layer, ((rows, cols), bias, prev)) in chain.into_iter().enumerate() {
            if bias != rows || prev.is_some_and(|p| p != cols) {
                return Err(Error::Malformed(format!(
                    "MLP layer {} has inconsistent shape {rows}x{cols} (bias {bias})",
                    layer + 1
                )));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("MlpParams"));
        }
        Ok(())
    }

    pub(crate) fn layers(&self) -> [(&Mat, &Vec<f64>); 4] {
        [
            (&self.w1, &self.b1),
            (&self.w2, &self.b2),
            (&self.w3, &self.b3),
            (&self.w4, &self.b4),
        ]
    }
}

impl ParamSet for MlpParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
            self.w3.as_slice(),
            &self.b3,
            self.w4.as_slice(),
            &self.b4,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
            self.w3.as_mut_slice(),
            &mut self.b3,
            self.w4.as_mut_slice(),
            &mut self.b4,
        ]
    }
}

/// `x° = tanh(W₄ tanh(W₃ tanh(W₂ tanh(W₁ r + b₁) + b₂) + b₃) + b₄)`.
pub fn mlp_forward(p: &MlpParams, r: &[f64]) -> Result<MlpActivations> {
    if r.len() != p.d_in() {
        return Err(Error::DimensionMismatch {
            op: "mlp_forward",
            left: p.w1.shape(),
            right: (r.len(), 1),
        });
    }
    let a1 = dense_tanh(&p.w1, &p.b1, r);
    let a2 = dense_tanh(&p.w2, &p.b2, &a1);
    let a3 = dense_tanh(&p.w3, &p.b3, &a2);
    let a4 = dense_tanh(&p.w4, &p.b4, &a3);
    Ok(MlpActivations {
        layers: [a1, a2, a3, a4],
    })
}

fn batch_matrices<B: Borrow<TrainingPair>>(p: &MlpParams, batch: &[B]) -> Result<(Mat, Mat)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty training batch"));
    }
    let (d_in, d_out) = (p.d_in(), p.d_out());
    let mut x = Mat::zeros(batch.len(), d_in);
    let mut t = Mat::zeros(batch.len(), d_out);
    for (i, pair) in batch.iter().enumerate() {
        let pair = pair.borrow();
        if pair.input.len() != d_in || pair.target.len() != d_out {
            return Err(Error::DimensionMismatch {
                op: "mlp_loss_and_grad",
                left: (d_in, d_out),
                right: (pair.input.len(), pair.target.len()),
            });
        }
        x.row_mut(i).copy_from_slice(&pair.input);
        t.row_mut(i).copy_from_slice(&pair.target);
    }
    Ok((x, t))
}

/// Mean squared error `L = (1/T) Σᵢ ‖xᵢ − xᵢ°‖₂²` over the batch and its exact
/// gradient by backpropagation.
pub fn mlp_loss_and_grad<B: Borrow<TrainingPair>>(
    p: &MlpParams,
    batch: &[B],
) -> Result<(f64, MlpParams)> {
    let (x, t) = batch_matrices(p, batch)?;
    let count = batch.len() as f64;

    let mut acts: Vec<Mat> = Vec::with_capacity(4);
    for (w, b) in p.layers() {
        let input = acts.last().unwrap_or(&x);
        let mut z = affine_batch(input, w, b);
        tanh_in_place(&mut z);
        acts.push(z);
    }

    let out = &acts[3];
    let mut delta = out.sub(&t)?;
    let loss = delta.frobenius_norm().powi(2) / count;
    delta.scale_mut(2.0 / count);

    let mut grad = p.zeros_like();
    for layer in (0..4).rev() {
        tanh_backward(&mut delta, &acts[layer]);
        let input = if layer == 0 { &x } else { &acts[layer - 1] };
        let gw = delta.t_matmul(input)?;
        let (w, _) = p.layers()[layer];
        let next_delta = if layer > 0 {
            Some(delta.matmul(w)?)
        } else {
            None
        };
        let (gw_slot, gb_slot) = match layer {
            0 => (&mut grad.w1, &mut grad.b1),
            1 => (&mut grad.w2, &mut grad.b2),
            2 => (&mut grad.w3, &mut grad.b3),
            _ => (&mut grad.w4, &mut grad.b4),
        };
        *gw_slot = gw;
        column_sums_into(&delta, gb_slot);
        if let Some(nd) = next_delta {
            delta = nd;
        }
    }

    if !loss.is_finite() {
        return Err(Error::NonFinite("mlp_loss_and_grad"));
    }
    Ok((loss, grad))
}
