//! Minimal row-major dense matrix. Enough linear algebra for the embedding
//! and classifier code; nothing clever.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix backing vector",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("matrix rows"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "row length",
                    expected: cols,
                    got: rows[i].len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[F]> {
        self.data.chunks_exact(self.cols)
    }

    /// y = M x, with M row-major (rows x cols), |x| = cols.
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        debug_assert_eq!(x.len(), self.cols);
        self.iter_rows().map(|row| dot(row, x)).collect()
    }

    /// y = M^T x, |x| = rows. Accumulates row-wise to stay cache-friendly.
    pub fn matvec_transposed(&self, x: &[F]) -> Vec<F> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![F::zero(); self.cols];
        for (i, row) in self.iter_rows().enumerate() {
            axpy(x[i], row, &mut y);
        }
        y
    }

    pub fn frobenius_sq(&self) -> F {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn scaled_add(&mut self, factor: F, other: &Matrix<F>) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += factor * b;
        }
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

/// y += a * x
pub fn axpy<F: Scalar>(a: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x.iter()) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_against_hand_values() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![0.0, -1.0, 1.0]]).unwrap();
        let y = m.matvec(&[1.0, 1.0, 2.0]);
        assert_eq!(y, vec![9.0, 1.0]);
        let yt = m.matvec_transposed(&[2.0, 3.0]);
        assert_eq!(yt, vec![2.0, 1.0, 9.0]);
    }

    #[test]
    fn frobenius_matches_sum_of_squares() {
        let m = Matrix::from_rows(vec![vec![1.0_f64, -2.0], vec![2.0, 0.5]]).unwrap();
        assert!((m.frobenius_sq() - (1.0 + 4.0 + 4.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Matrix::from_vec(2, 2, vec![1.0_f64; 3]).is_err());
    }
}
