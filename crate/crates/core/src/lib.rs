//! Symmetry-protected topological phase recognition on small qubit chains.

pub mod error;
pub mod pauli;
pub mod simulator;
pub mod noise;
pub mod spinchain;
pub mod vqe;
pub mod qcnn;
pub mod experiments;
pub mod config;
pub mod verify;

pub use error::{Error, Result};
