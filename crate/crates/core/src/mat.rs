//! Dense row-major `f64` matrix used for distance, gradient, and score grids.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense matrix. For the matrices in this crate rows index
/// references and columns index queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data, rejecting shape mismatches and
    /// non-finite entries (the offending row/column is named).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix"));
        }
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch {
                what: "matrix data",
                left: rows * cols,
                right: data.len(),
            });
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: k / cols,
                    col: k % cols,
                    message: "non-finite value".to_string(),
                });
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Copies column `col` into a contiguous vector.
    pub fn col(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    /// Overwrites column `col` from a slice of length `rows`.
    pub fn set_col(&mut self, col: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self.set(i, col, *v);
        }
    }

    /// Minimum entry of the whole matrix.
    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Index of the minimum value; ties break to the smallest index.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best = 0usize;
    let mut best_value = *values.first()?;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    Some(best)
}

/// Index of the maximum value; ties break to the smallest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best = 0usize;
    let mut best_value = *values.first()?;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    Some(best)
}
