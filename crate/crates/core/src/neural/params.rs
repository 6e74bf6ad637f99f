use crate::numerics::{Mat, RngState};

/// A fixed collection of parameter tensors that an optimizer can walk.
pub trait ParamSet: Clone {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Glorot/Xavier uniform weights: `U(−√(6/(fan_in+fan_out)), +…)`.
pub(crate) fn glorot(rng: &mut RngState, fan_out: usize, fan_in: usize) -> Mat {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Mat::from_fn(fan_out, fan_in, |_, _| rng.uniform_range(-limit, limit))
}

/// `Z = X·Wᵀ + 1·bᵀ` for a batch stored one sample per row.
pub(crate) fn affine_batch(x: &Mat, w: &Mat, b: &[f64]) -> Mat {
    let mut z = x.matmul_t(w).expect("affine shapes checked by caller");
    for i in 0..z.rows() {
        for (v, bias) in z.row_mut(i).iter_mut().zip(b) {
            *v += bias;
        }
    }
    z
}

pub(crate) fn tanh_in_place(z: &mut Mat) {
    z.as_mut_slice().iter_mut().for_each(|v| *v = v.tanh());
}

/// `δ ⊙ (1 − a²)`, the tanh derivative expressed through the activation.
pub(crate) fn tanh_backward(delta: &mut Mat, activation: &Mat) {
    for (d, a) in delta.as_mut_slice().iter_mut().zip(activation.as_slice()) {
        *d *= 1.0 - a * a;
    }
}

pub(crate) fn column_sums_into(m: &Mat, out: &mut [f64]) {
    for i in 0..m.rows() {
        for (o, v) in out.iter_mut().zip(m.row(i)) {
            *o += v;
        }
    }
}

/// `y = tanh(W x + b)` for a single vector.
///
/// Goes through the same batched kernel as training, so a single-sample
/// forward pass is bit-identical to the corresponding row of a batch.
pub(crate) fn dense_tanh(w: &Mat, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut z = affine_batch(&Mat::row_vector(x.to_vec()), w, b);
    tanh_in_place(&mut z);
    z.into_vec()
}

/// Rescales `v` so its root-mean-square is one (zero stays zero).
///
/// Networks see residuals through this map, which makes their decisions
/// invariant to the overall scale of the measurements.
pub fn scale_to_unit_rms(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    let s = (v.len() as f64).sqrt() / norm;
    v.iter().map(|x| x * s).collect()
}
