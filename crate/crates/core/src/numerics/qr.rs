//! Householder QR and the least-squares routines built on it.

use crate::error::{Error, Result};
use crate::numerics::mat::{axpy, dot, norm2, Mat};

/// Compact Householder factorization `A = QR` of a tall matrix.
///
/// Columns are kept contiguous (the factor works on `Aᵀ` internally), so
/// reflector application runs over unit-stride slices.
#[derive(Clone, Debug)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Row `j` holds reflector `v_j` in entries `j..rows` and R's column `j`
    /// above the diagonal in entries `0..j`.
    packed: Vec<Vec<f64>>,
    betas: Vec<f64>,
    diag: Vec<f64>,
}

impl Qr {
    /// Factors `a` and checks numerical rank with
    /// `tol = max(rows, cols) * eps * max_i |R_ii|`.
    pub fn factor(a: &Mat) -> Result<Qr> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::DimensionMismatch {
                op: "qr (needs rows >= cols)",
                left: (m, n),
                right: (n, m),
            });
        }
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut betas = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);

        for j in 0..n {
            let (head, tail) = cols.split_at_mut(j + 1);
            let v = &mut head[j];
            let x_norm = norm2(&v[j..]);
            if x_norm == 0.0 {
                betas.push(0.0);
                diag.push(0.0);
                continue;
            }
            let alpha = if v[j] >= 0.0 { -x_norm } else { x_norm };
            v[j] -= alpha;
            let vtv = dot(&v[j..], &v[j..]);
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            for c in tail.iter_mut() {
                let s = beta * dot(&v[j..], &c[j..]);
                if s != 0.0 {
                    axpy(-s, &v[j..], &mut c[j..]);
                }
            }
            betas.push(beta);
            diag.push(alpha);
        }

        let qr = Qr {
            rows: m,
            cols: n,
            packed: cols,
            betas,
            diag,
        };
        qr.check_rank()?;
        Ok(qr)
    }

    fn check_rank(&self) -> Result<()> {
        let max_diag = self.diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let tolerance = self.rows.max(self.cols) as f64 * f64::EPSILON * max_diag;
        for (column, d) in self.diag.iter().enumerate() {
            if !(d.abs() > tolerance) {
                return Err(Error::RankDeficient {
                    column,
                    diagonal: d.abs(),
                    tolerance,
                });
            }
        }
        Ok(())
    }

    pub fn r_diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Applies `Qᵀ` to a single column in place.
    fn apply_qt(&self, b: &mut [f64]) {
        for j in 0..self.cols {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            let v = &self.packed[j][j..];
            let s = beta * dot(v, &b[j..]);
            axpy(-s, v, &mut b[j..]);
        }
    }

    fn back_substitute(&self, qtb: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = qtb[i];
            for j in i + 1..n {
                // R[i, j] lives in column j's packed storage at row i.
                s -= self.packed[j][i] * x[j];
            }
            x[i] = s / self.diag[i];
        }
        x
    }

    /// Least-squares solution for every column of `b`.
    pub fn solve(&self, b: &Mat) -> Result<Mat> {
        if b.rows() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "lstsq",
                left: (self.rows, self.cols),
                right: b.shape(),
            });
        }
        let mut x = Mat::zeros(self.cols, b.cols());
        let mut work = vec![0.0; self.rows];
        for c in 0..b.cols() {
            for (i, w) in work.iter_mut().enumerate() {
                *w = b[(i, c)];
            }
            self.apply_qt(&mut work);
            let xc = self.back_substitute(&work);
            x.set_column(c, &xc);
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("lstsq"));
        }
        Ok(x)
    }
}

/// Minimizes `‖a·x − b‖_F` column by column via Householder QR.
pub fn lstsq(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            op: "lstsq",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Qr::factor(a)?.solve(b)
}

/// `y − a_sub · lstsq(a_sub, y)`: the part of `y` orthogonal to `range(a_sub)`.
pub fn projection_residual(a_sub: &Mat, y: &Mat) -> Result<Mat> {
    let x = lstsq(a_sub, y)?;
    y.sub(&a_sub.matmul(&x)?)
}
