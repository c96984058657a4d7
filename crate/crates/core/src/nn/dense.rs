use serde::{Deserialize, Serialize};

use super::tensor::{add_outer, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    Identity,
}

/// Fully connected layer `act(W·a + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayerParams<S> {
    /// (out_dim × in_dim), row-major.
    pub weights: Tensor<S>,
    pub bias: Tensor<S>,
    pub activation: Activation,
}

impl<S: Scalar> DenseLayerParams<S> {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        DenseLayerParams {
            weights: Tensor::zeros(vec![out_dim, in_dim]),
            bias: Tensor::zeros(vec![out_dim]),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.shape().len() != 2 || self.bias.shape() != [self.weights.rows()] {
            return Err(Error::structural(format!(
                "dense layer weights {:?} and bias {:?} disagree",
                self.weights.shape(),
                self.bias.shape()
            )));
        }
        Ok(())
    }

    /// Pre-activation `W·a + b`.
    pub fn pre_activation(&self, a: &[S]) -> Vec<S> {
        self.weights.affine(a, self.bias.values())
    }

    pub fn activate(&self, z: &[S]) -> Vec<S> {
        match self.activation {
            Activation::Relu => z.iter().map(|&v| v.relu()).collect(),
            Activation::Identity => z.to_vec(),
            Activation::Softmax => softmax(z),
        }
    }

    /// Given the gradient w.r.t. the pre-activation, accumulates parameter
    /// gradients into `grads` and returns the gradient w.r.t. the layer input.
    pub fn backward_pre(&self, input: &[S], dz: &[S], grads: &mut DenseLayerParams<S>) -> Vec<S> {
        add_outer(grads.weights.values_mut(), dz, input);
        for (b, &d) in grads.bias.values_mut().iter_mut().zip(dz) {
            *b += d;
        }
        self.weights.transpose_mul(dz)
    }
}

/// Max-shifted softmax.
pub fn softmax<S: Scalar>(z: &[S]) -> Vec<S> {
    let max = z.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = z.iter().map(|&v| (v - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// ReLU derivative applied to an upstream gradient. The derivative at 0 is 0.
pub fn relu_backward<S: Scalar>(z: &[S], upstream: &[S]) -> Vec<S> {
    z.iter()
        .zip(upstream)
        .map(|(&zi, &g)| if zi > S::zero() { g } else { S::zero() })
        .collect()
}
