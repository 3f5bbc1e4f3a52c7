//! Minimal dense network engine: parameters, forward/backward, SGD, Hessian-vector
//! products, Laplace noise and norm clipping.

mod batch;
mod hvp;
mod mlp;
mod model;
mod noise;
mod params;

pub use batch::{Batch, Targets};
pub use hvp::{default_fd_eps, hvp, HvpMethod};
pub use mlp::{argmax_rows, init_params, loss, loss_and_grad, outputs, predict, sgd_step, softmax_rows};
pub use model::{Activation, Loss, ModelSpec};
pub use noise::{clip_to_norm, laplace_noise, laplace_scale, sample_laplace};
pub use params::ParamVec;
