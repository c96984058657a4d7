use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{all_finite, Scalar};

/// Dense row-major tensor. Only rank 1 (vectors) and rank 2 (matrices) are
/// used by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, values: Vec<S>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != values.len() {
            return Err(Error::structural(format!(
                "tensor shape {:?} needs {} values, got {}",
                shape,
                expected,
                values.len()
            )));
        }
        Ok(Tensor { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            values: vec![S::zero(); n],
        }
    }

    pub fn vector(values: Vec<S>) -> Self {
        Tensor {
            shape: vec![values.len()],
            values,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.values)
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        if self.shape.len() > 1 {
            self.shape[1]
        } else {
            1
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> S {
        self.values[r * self.cols() + c]
    }

    /// `out = self · x + bias` for a matrix `self` of shape (rows × cols).
    pub fn affine(&self, x: &[S], bias: &[S]) -> Vec<S> {
        let cols = self.cols();
        debug_assert_eq!(x.len(), cols);
        debug_assert_eq!(bias.len(), self.rows());
        self.values
            .chunks_exact(cols)
            .zip(bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi))
            .collect()
    }

    /// `selfᵀ · dy`, the input gradient of an affine map.
    pub fn transpose_mul(&self, dy: &[S]) -> Vec<S> {
        let cols = self.cols();
        let mut out = vec![S::zero(); cols];
        for (row, &d) in self.values.chunks_exact(cols).zip(dy) {
            if d == S::zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * d;
            }
        }
        out
    }
}

/// Accumulates the outer product `dy ⊗ x` into a row-major buffer of shape
/// (dy.len() × x.len()).
pub fn add_outer<S: Scalar>(acc: &mut [S], dy: &[S], x: &[S]) {
    debug_assert_eq!(acc.len(), dy.len() * x.len());
    for (row, &d) in acc.chunks_exact_mut(x.len()).zip(dy) {
        if d == S::zero() {
            continue;
        }
        for (a, &xi) in row.iter_mut().zip(x) {
            *a += d * xi;
        }
    }
}
