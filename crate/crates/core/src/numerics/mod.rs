//! Dense linear algebra, vectorization identities and seeded generators.

mod cmat;
mod mat;
mod qr;
mod rng;

pub use cmat::{complex_to_real_stacked, CMat};
pub use mat::{axpy, dot, norm2, Mat};
pub use qr::{lstsq, projection_residual, Qr};
pub use rng::{complex_gaussian, derive_seed, gaussian, RngState};

use crate::error::{Error, Result};

pub fn matmul(a: &Mat, b: &Mat) -> Result<Mat> {
    a.matmul(b)
}

pub fn frobenius_norm(x: &Mat) -> f64 {
    x.frobenius_norm()
}

/// `vec(Xᵀ)`: the rows of `x` laid end to end as one column.
///
/// Row `i` of an `n x K` matrix lands in entries `i*K .. (i+1)*K`, which for a
/// row-major matrix is exactly its storage order.
pub fn stack_rows(x: &Mat) -> Mat {
    Mat::column_vector(x.as_slice().to_vec())
}

/// Inverse of [`stack_rows`].
pub fn unstack_rows(v: &[f64], rows: usize, cols: usize) -> Result<Mat> {
    Mat::from_vec(rows, cols, v.to_vec())
}

/// `(A ⊗ I_k) · x` without materializing the Kronecker product.
///
/// Block `i` (length `k`) of the output is `Σ_j a_ij · x_block_j`, i.e.
/// `stack_rows(A · X)` where `x = stack_rows(X)`.
pub fn kron_block_apply(a: &Mat, k: usize, x_stacked: &Mat) -> Result<Mat> {
    if k == 0 {
        return Err(Error::invalid(
            "kron_block_apply: block size must be positive",
        ));
    }
    if x_stacked.cols() != 1 || x_stacked.rows() != a.cols() * k {
        return Err(Error::DimensionMismatch {
            op: "kron_block_apply",
            left: (a.rows() * k, a.cols() * k),
            right: x_stacked.shape(),
        });
    }
    let x = unstack_rows(x_stacked.as_slice(), a.cols(), k)?;
    Ok(stack_rows(&a.matmul(&x)?))
}

/// `(A ⊗ I_k)ᵀ · r`, the block correlations used by block pursuit.
pub fn kron_block_apply_transpose(a: &Mat, k: usize, r_stacked: &Mat) -> Result<Mat> {
    if k == 0 || r_stacked.cols() != 1 || r_stacked.rows() != a.rows() * k {
        return Err(Error::DimensionMismatch {
            op: "kron_block_apply_transpose",
            left: (a.cols() * k, a.rows() * k),
            right: r_stacked.shape(),
        });
    }
    let r = unstack_rows(r_stacked.as_slice(), a.rows(), k)?;
    Ok(stack_rows(&a.t_matmul(&r)?))
}

/// Indices of the `k` largest `scores`, ties broken toward the lower index.
/// The result is sorted ascending.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Index of the largest score (lowest index on ties) among those `allowed`.
pub fn argmax_where(scores: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stack_rows_hand_case() {
        let x = Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(stack_rows(&x).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        let col = Mat::column_vector(vec![5.0, 6.0, 7.0]);
        assert_eq!(stack_rows(&col), col);
    }

    #[test]
    fn identity_kron_leaves_vector_unchanged() {
        let x = Mat::column_vector(vec![1.0, -2.0, 3.0, 0.5, 0.0, 9.0]);
        assert_eq!(kron_block_apply(&Mat::identity(2), 3, &x).unwrap(), x);
    }

    #[test]
    fn scalar_kron_scales() {
        let a = Mat::from_rows(&[[2.0]]);
        let x = Mat::column_vector(vec![1.0, -1.0]);
        assert_eq!(
            kron_block_apply(&a, 2, &x).unwrap().as_slice(),
            &[2.0, -2.0]
        );
    }

    #[test]
    fn kron_length_mismatch() {
        let a = Mat::zeros(2, 3);
        assert!(kron_block_apply(&a, 2, &Mat::zeros(5, 1)).is_err());
    }

    #[test]
    fn top_k_breaks_ties_low() {
        assert_eq!(top_k_indices(&[1.0, 3.0, 3.0, 0.5, 3.0], 2), vec![1, 2]);
        assert_eq!(top_k_indices(&[0.0, 0.0, 0.0], 2), vec![0, 1]);
        assert_eq!(argmax_where(&[2.0, 5.0, 5.0], |_| true), Some(1));
        assert_eq!(argmax_where(&[2.0, 5.0, 5.0], |i| i != 1), Some(2));
        assert_eq!(argmax_where(&[2.0], |_| false), None);
    }
}
