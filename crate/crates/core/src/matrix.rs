use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense `N x R` matrix of relaxed cluster indicators, stored row-major so that
/// every row (one vertex) is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    n_vertices: usize,
    n_classes: usize,
    data: Vec<f64>,
}

impl AssignmentMatrix {
    pub fn zeros(n_vertices: usize, n_classes: usize) -> Self {
        AssignmentMatrix { n_vertices, n_classes, data: vec![0.0; n_vertices * n_classes] }
    }

    /// Wraps row-major data without projecting it.
    pub fn from_row_major(n_vertices: usize, n_classes: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_vertices * n_classes {
            return Err(Error::DimensionMismatch { expected: n_vertices * n_classes, found: data.len() });
        }
        Ok(AssignmentMatrix { n_vertices, n_classes, data })
    }

    /// Builds a matrix whose column `r` is `columns[r]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n_classes = columns.len();
        let n_vertices = columns.first().map_or(0, Vec::len);
        let mut m = AssignmentMatrix::zeros(n_vertices, n_classes);
        for (r, col) in columns.iter().enumerate() {
            if col.len() != n_vertices {
                return Err(Error::DimensionMismatch { expected: n_vertices, found: col.len() });
            }
            for (i, &v) in col.iter().enumerate() {
                m.data[i * n_classes + r] = v;
            }
        }
        Ok(m)
    }

    /// Hard assignment: row `i` is the unit vector of `labels[i]`.
    pub fn from_labels(labels: &[usize], n_classes: usize) -> Result<Self> {
        let mut m = AssignmentMatrix::zeros(labels.len(), n_classes);
        for (i, &c) in labels.iter().enumerate() {
            if c >= n_classes {
                return Err(Error::ClassOutOfRange { class: c, n_classes });
            }
            m.data[i * n_classes + c] = 1.0;
        }
        Ok(m)
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn get(&self, i: usize, r: usize) -> f64 {
        self.data[i * self.n_classes + r]
    }

    #[inline]
    pub fn set(&mut self, i: usize, r: usize, v: f64) {
        self.data[i * self.n_classes + r] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_classes..(i + 1) * self.n_classes]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact would yield nothing useful for R = 0
        self.data.chunks(self.n_classes.max(1)).take(self.n_vertices)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        self.column_into(r, &mut out);
        out
    }

    pub fn column_into(&self, r: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n_vertices) {
            *o = self.data[i * self.n_classes + r];
        }
    }

    /// Squared Frobenius distance `||self - other||_F^2`.
    pub fn dist_sq(&self, other: &AssignmentMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}
