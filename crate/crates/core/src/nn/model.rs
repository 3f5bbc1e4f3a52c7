use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SoftmaxCrossEntropy,
    /// Half mean squared error, `1/B Σ ½‖ŷ − y‖²`, so the linear model's Hessian is `X̃ᵀX̃/B`.
    MeanSquaredError,
}

/// Shape and objective of a dense network. The hidden activation applies to
/// every layer except the last, whose outputs are raw logits / predictions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    layer_dims: Vec<usize>,
    activation: Activation,
    loss: Loss,
}

impl ModelSpec {
    pub fn new(layer_dims: Vec<usize>, activation: Activation, loss: Loss) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::config(
                "layer_dims",
                "need at least an input and an output dimension",
            ));
        }
        if layer_dims.contains(&0) {
            return Err(Error::config("layer_dims", "all dimensions must be >= 1"));
        }
        if loss == Loss::MeanSquaredError && activation != Activation::Identity {
            return Err(Error::config(
                "loss",
                "mean_squared_error requires the identity activation",
            ));
        }
        Ok(Self {
            layer_dims,
            activation,
            loss,
        })
    }

    /// Single-layer softmax classifier, mostly for tests.
    pub fn linear_classifier(input: usize, classes: usize) -> Result<Self> {
        Self::new(vec![input, classes], Activation::Identity, Loss::SoftmaxCrossEntropy)
    }

    /// Single-layer least-squares model whose loss is exactly quadratic in the parameters.
    pub fn linear_regression(input: usize, outputs: usize) -> Result<Self> {
        Self::new(vec![input, outputs], Activation::Identity, Loss::MeanSquaredError)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("validated non-empty")
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Total parameter count `Σ_l (d_l·d_{l+1} + d_{l+1})`.
    pub fn param_count(&self) -> usize {
        self.layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Offsets of layer `l`'s weight block (row-major `out × in`) and bias block.
    pub fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut offset = 0;
        for w in self.layer_dims.windows(2).take(l) {
            offset += w[0] * w[1] + w[1];
        }
        let (fan_in, fan_out) = (self.layer_dims[l], self.layer_dims[l + 1]);
        (offset, offset + fan_in * fan_out)
    }

    pub fn is_classifier(&self) -> bool {
        self.loss == Loss::SoftmaxCrossEntropy
    }

    /// Identity/MSE with a single layer: loss is an exact quadratic in the parameters.
    pub fn is_quadratic(&self) -> bool {
        self.loss == Loss::MeanSquaredError && self.num_layers() == 1
    }
}
