//! The learned solvers: network-guided block pursuit (Algorithm I) and
//! RNN-guided subspace pursuit (Algorithm II).
//!
//! Both take their network through a scorer trait so that trained weights,
//! the plain correlation `Aᵀr`, and ground-truth oracles are interchangeable.

mod algorithm_one;
mod algorithm_two;
mod scorer;

pub use algorithm_one::{algorithm_one, AlgorithmOneOptions, BlockRefit};
pub use algorithm_two::{algorithm_two, AlgorithmTwoOptions, HiddenStateMode};
pub use scorer::{
    BlockScorer, CorrelationScorer, MlpScorer, OracleBlockScorer, OracleSupportScorer, RnnScorer,
    SequenceScorer,
};
