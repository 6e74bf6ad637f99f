//! Single-layer vanilla RNN with tanh hidden and output units:
//!
//! ```text
//! o_t = W_ih x_t + W_hh h_{t-1} + b_h
//! h_t = tanh(o_t)
//! y_t = tanh(W_ho h_t + b_o)
//! ```

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::neural::params::{
    affine_batch, column_sums_into, dense_tanh, glorot, tanh_backward, tanh_in_place, ParamSet,
};
use crate::numerics::{Mat, RngState};

#[derive(Clone, Debug, PartialEq)]
pub struct RnnParams {
    pub w_ih: Mat,
    pub w_hh: Mat,
    pub w_ho: Mat,
    pub b_h: Vec<f64>,
    pub b_o: Vec<f64>,
}

/// An input sequence with its per-step targets.
#[derive(Clone, Debug, PartialEq)]
pub struct SequencePair {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RnnTrace {
    pub outputs: Vec<Vec<f64>>,
    pub hidden: Vec<Vec<f64>>,
}

impl RnnParams {
    pub fn init(d_in: usize, hidden: usize, d_out: usize, rng: &mut RngState) -> Self {
        RnnParams {
            w_ih: glorot(rng, hidden, d_in),
            w_hh: glorot(rng, hidden, hidden),
            w_ho: glorot(rng, d_out, hidden),
            b_h: vec![0.0; hidden],
            b_o: vec![0.0; d_out],
        }
    }

    pub fn zeros(d_in: usize, hidden: usize, d_out: usize) -> Self {
        RnnParams {
            w_ih: Mat::zeros(hidden, d_in),
            w_hh: Mat::zeros(hidden, hidden),
            w_ho: Mat::zeros(d_out, hidden),
            b_h: vec![0.0; hidden],
            b_o: vec![0.0; d_out],
        }
    }

    pub fn d_in(&self) -> usize {
        self.w_ih.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.rows()
    }

    pub fn d_out(&self) -> usize {
        self.w_ho.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.w_ih.rows();
        let ok = self.w_hh.shape() == (h, h)
            && self.w_ho.cols() == h
            && self.b_h.len() == h
            && self.b_o.len() == self.w_ho.rows();
        if !ok {
            return Err(Error::Malformed(format!(
                "RNN shapes inconsistent: w_ih {:?}, w_hh {:?}, w_ho {:?}, b_h {}, b_o {}",
                self.w_ih.shape(),
                self.w_hh.shape(),
                self.w_ho.shape(),
                self.b_h.len(),
                self.b_o.len()
            )));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("RnnParams"));
        }
        Ok(())
    }

    /// One time step from `h_prev`; returns `(h_t, y_t)`.
    pub fn step(&self, h_prev: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.d_in() || h_prev.len() != self.hidden() {
            return Err(Error::DimensionMismatch {
                op: "rnn step",
                left: (self.hidden(), self.d_in()),
                right: (h_prev.len(), x.len()),
            });
        }
        // The batched kernel with one row, so steps match training exactly.
        let mut o = affine_batch(&Mat::row_vector(x.to_vec()), &self.w_ih, &self.b_h);
        o.add_assign(&Mat::row_vector(h_prev.to_vec()).matmul_t(&self.w_hh)?)?;
        tanh_in_place(&mut o);
        let h = o.into_vec();
        let y = dense_tanh(&self.w_ho, &self.b_o, &h);
        Ok((h, y))
    }
}

impl ParamSet for RnnParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_ih.as_slice(),
            self.w_hh.as_slice(),
            self.w_ho.as_slice(),
            &self.b_h,
            &self.b_o,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_ih.as_mut_slice(),
            self.w_hh.as_mut_slice(),
            self.w_ho.as_mut_slice(),
            &mut self.b_h,
            &mut self.b_o,
        ]
    }
}

pub fn rnn_forward(p: &RnnParams, sequence: &[Vec<f64>], h0: &[f64]) -> Result<RnnTrace> {
    let mut h = h0.to_vec();
    let mut outputs = Vec::with_capacity(sequence.len());
    let mut hidden = Vec::with_capacity(sequence.len());
    for x in sequence {
        let (h_next, y) = p.step(&h, x)?;
        h = h_next;
        hidden.push(h.clone());
        outputs.push(y);
    }
    Ok(RnnTrace { outputs, hidden })
}

/// Mean over every step of every sequence of `‖target_t − y_t‖²`, with the
/// gradient from backpropagation through time. Each sequence starts from a
/// zero hidden state. Sequences of different lengths are processed in
/// length groups.
pub fn rnn_loss_and_grad<B: Borrow<SequencePair>>(
    p: &RnnParams,
    sequences: &[B],
) -> Result<(f64, RnnParams)> {
    if sequences.is_empty() {
        return Err(Error::invalid("empty sequence batch"));
    }
    let mut total_steps = 0usize;
    for s in sequences {
        let s = s.borrow();
        if s.inputs.len() != s.targets.len() {
            return Err(Error::DimensionMismatch {
                op: "rnn_loss_and_grad (sequence length)",
                left: (s.inputs.len(), 1),
                right: (s.targets.len(), 1),
            });
        }
        for (x, t) in s.inputs.iter().zip(&s.targets) {
            if x.len() != p.d_in() || t.len() != p.d_out() {
                return Err(Error::DimensionMismatch {
                    op: "rnn_loss_and_grad",
                    left: (p.d_in(), p.d_out()),
                    right: (x.len(), t.len()),
                });
            }
        }
        total_steps += s.inputs.len();
    }
    if total_steps == 0 {
        return Err(Error::invalid("all sequences are empty"));
    }

    let mut lengths: Vec<usize> = sequences.iter().map(|s| s.borrow().inputs.len()).collect();
    lengths.sort_unstable();
    lengths.dedup();

    let mut grad = p.zeros_like();
    let mut loss = 0.0;
    let scale = 1.0 / total_steps as f64;
    for len in lengths.into_iter().filter(|&l| l > 0) {
        let group: Vec<&SequencePair> = sequences
            .iter()
            .map(|s| s.borrow())
            .filter(|s| s.inputs.len() == len)
            .collect();
        loss += bptt_group(p, &group, len, scale, &mut grad)?;
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("rnn_loss_and_grad"));
    }
    Ok((loss, grad))
}

/// BPTT for equal-length sequences, batched one sequence per row.
fn bptt_group(
    p: &RnnParams,
    group: &[&SequencePair],
    len: usize,
    scale: f64,
    grad: &mut RnnParams,
) -> Result<f64> {
    let batch = group.len();
    let n_h = p.hidden();
    let gather = |t: usize, targets: bool, width: usize| {
        let mut m = Mat::zeros(batch, width);
        for (i, s) in group.iter().enumerate() {
            let src = if targets { &s.targets[t] } else { &s.inputs[t] };
            m.row_mut(i).copy_from_slice(src);
        }
        m
    };
    let xs: Vec<Mat> = (0..len).map(|t| gather(t, false, p.d_in())).collect();

    let mut hs: Vec<Mat> = Vec::with_capacity(len + 1);
    hs.push(Mat::zeros(batch, n_h));
    let mut ys: Vec<Mat> = Vec::with_capacity(len);
    for x in &xs {
        let mut o = affine_batch(x, &p.w_ih, &p.b_h);
        o.add_assign(&hs.last().expect("h0").matmul_t(&p.w_hh)?)?;
        tanh_in_place(&mut o);
        let mut y = affine_batch(&o, &p.w_ho, &p.b_o);
        tanh_in_place(&mut y);
        hs.push(o);
        ys.push(y);
    }

    let mut loss = 0.0;
    let mut dh_next = Mat::zeros(batch, n_h);
    for t in (0..len).rev() {
        let mut dy = ys[t].sub(&gather(t, true, p.d_out()))?;
        loss += dy.frobenius_norm().powi(2) * scale;
        dy.scale_mut(2.0 * scale);
        tanh_backward(&mut dy, &ys[t]);

        let h_t = &hs[t + 1];
        grad.w_ho.add_assign(&dy.t_matmul(h_t)?)?;
        column_sums_into(&dy, &mut grad.b_o);

        let mut dh = dy.matmul(&p.w_ho)?;
        dh.add_assign(&dh_next)?;
        tanh_backward(&mut dh, h_t);

        grad.w_ih.add_assign(&dh.t_matmul(&xs[t])?)?;
        grad.w_hh.add_assign(&dh.t_matmul(&hs[t])?)?;
        column_sums_into(&dh, &mut grad.b_h);
        dh_next = dh.matmul(&p.w_hh)?;
    }
    Ok(loss)
}
