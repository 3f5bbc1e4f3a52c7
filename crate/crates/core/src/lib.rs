//! Deterministic federated-learning simulator for studying targeted model
//! poisoning and client-side defenses that perturb the Hessian kernel.

pub mod analysis;
pub mod attack;
pub mod cli;
pub mod data;
pub mod defense;
pub mod engine;
pub mod error;
pub mod nn;
pub mod rng;
pub mod scenario;

pub use error::{Error, IdxError, Result};
