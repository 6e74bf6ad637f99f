//! Complex matrices as a pair of real matrices, plus the real-stacking
//! isomorphism that lets every solver stay real-valued.

use crate::error::{Error, Result};
use crate::numerics::mat::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub re: Mat,
    pub im: Mat,
}

impl CMat {
    pub fn new(re: Mat, im: Mat) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::DimensionMismatch {
                op: "CMat::new",
                left: re.shape(),
                right: im.shape(),
            });
        }
        Ok(CMat { re, im })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            re: Mat::zeros(rows, cols),
            im: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        CMat {
            re: Mat::identity(n),
            im: Mat::zeros(n, n),
        }
    }

    pub fn from_real(re: Mat) -> Self {
        let (r, c) = re.shape();
        CMat {
            re,
            im: Mat::zeros(r, c),
        }
    }

    pub fn rows(&self) -> usize {
        self.re.rows()
    }

    pub fn cols(&self) -> usize {
        self.re.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        (self.re[(i, j)], self.im[(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, value: (f64, f64)) {
        self.re[(i, j)] = value.0;
        self.im[(i, j)] = value.1;
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        let rr = self.re.matmul(&other.re)?;
        let ii = self.im.matmul(&other.im)?;
        let ri = self.re.matmul(&other.im)?;
        let ir = self.im.matmul(&other.re)?;
        Ok(CMat {
            re: rr.sub(&ii)?,
            im: ri.add(&ir)?,
        })
    }

    /// Conjugate transpose `Aᴴ`.
    pub fn conj_transpose(&self) -> CMat {
        CMat {
            re: self.re.transpose(),
            im: self.im.transpose().scale(-1.0),
        }
    }

    pub fn add(&self, other: &CMat) -> Result<CMat> {
        Ok(CMat {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat> {
        Ok(CMat {
            re: self.re.sub(&other.re)?,
            im: self.im.sub(&other.im)?,
        })
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let a = self.re.frobenius_norm();
        let b = self.im.frobenius_norm();
        a.hypot(b)
    }

    /// Squared magnitude of every entry.
    pub fn abs_sq(&self) -> Mat {
        let data = self
            .re
            .as_slice()
            .iter()
            .zip(self.im.as_slice())
            .map(|(a, b)| a * a + b * b)
            .collect();
        Mat::from_vec(self.rows(), self.cols(), data).expect("shape preserved")
    }

    /// `[[Re, -Im], [Im, Re]]`, the 2m x 2n real representation of the operator.
    pub fn to_real_stacked(&self) -> Mat {
        complex_to_real_stacked(self)
    }

    /// `[Re; Im]`: each complex column becomes one real column of twice the length.
    /// This is how signal and measurement matrices enter the real-stacked system.
    pub fn stack_columns(&self) -> Mat {
        let (m, k) = self.shape();
        let mut out = Mat::zeros(2 * m, k);
        for i in 0..m {
            out.row_mut(i).copy_from_slice(self.re.row(i));
            out.row_mut(m + i).copy_from_slice(self.im.row(i));
        }
        out
    }

    /// Inverse of [`CMat::stack_columns`].
    pub fn unstack_columns(stacked: &Mat) -> Result<CMat> {
        if stacked.rows() % 2 != 0 {
            return Err(Error::invalid(format!(
                "real-stacked matrix must have an even row count, got {}",
                stacked.rows()
            )));
        }
        let m = stacked.rows() / 2;
        let top: Vec<usize> = (0..m).collect();
        let bottom: Vec<usize> = (m..2 * m).collect();
        Ok(CMat {
            re: stacked.select_rows(&top),
            im: stacked.select_rows(&bottom),
        })
    }
}

/// Real-stacked embedding of a complex matrix: `[[Re, -Im], [Im, Re]]`.
///
/// This is an algebra homomorphism, so `stack(A·B) = stack(A)·stack(B)` and
/// `stack(A)·[Re x; Im x] = [Re Ax; Im Ax]`.
pub fn complex_to_real_stacked(a: &CMat) -> Mat {
    let (m, n) = a.shape();
    let mut out = Mat::zeros(2 * m, 2 * n);
    for i in 0..m {
        let re = a.re.row(i);
        let im = a.im.row(i);
        {
            let top = out.row_mut(i);
            top[..n].copy_from_slice(re);
            for (d, v) in top[n..].iter_mut().zip(im) {
                *d = -v;
            }
        }
        let bottom = out.row_mut(m + i);
        bottom[..n].copy_from_slice(im);
        bottom[n..].copy_from_slice(re);
    }
    out
}
