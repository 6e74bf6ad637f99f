//! Jointly sparse multiple-measurement-vector (MMV) recovery with
//! neural-network-guided greedy pursuit, applied to downlink massive-MIMO
//! channel estimation.
//!
//! - [`numerics`]: dense real/complex matrices, Householder least squares,
//!   Kronecker/vectorization helpers, seeded generators.
//! - [`classic`]: OMP, SOMP, subspace pursuit and group LASSO baselines.
//! - [`neural`]: a four-layer tanh MLP and a vanilla tanh RNN, trained with Adam.
//! - [`data_gen`]: supervised training sets for both networks.
//! - [`dnn`]: the network-guided block pursuit and the RNN-modified subspace pursuit.
//! - [`mimo`]: synthetic angular-domain channels, the CS reduction and NMSE.

pub mod classic;
pub mod data_gen;
pub mod dnn;
pub mod error;
pub mod mimo;
pub mod neural;
pub mod numerics;

pub use error::{Error, Result};
