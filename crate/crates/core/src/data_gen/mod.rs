//! Supervised training sets for the two learned solvers: residual/block pairs
//! traced by block OMP, and residual sequences traced by subspace pursuit.

mod block;
mod file;
mod plant;
mod residual;

pub use block::{
    block_trace, generate_block_pairs, generate_block_pairs_count, BlockPairSet, BlockStep,
};
pub use file::{
    decode_dataset, encode_dataset, load_dataset, save_dataset, Dataset, DATASET_MAGIC, KIND_BLOCK,
    KIND_RESIDUAL,
};
pub use plant::{plant_problem, PlantConfig, PlantedProblem, SignalModel};
pub use residual::{
    column_trace, equalize_parts, generate_residual_pairs, generate_residual_pairs_count,
    ColumnTrace, ResidualPairSet,
};

/// Dimensions and seed a dataset was generated with. `seed` is not stored in
/// dataset files and reads back as 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetMeta {
    pub m: usize,
    pub n: usize,
    pub num_vectors: usize,
    pub sparsity: usize,
    pub seed: u64,
}

/// Position of a generated pair: planted problem index and pursuit step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairOrigin {
    pub problem: usize,
    pub step: usize,
}

/// What a training target marks at each pursuit step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetRule {
    /// The greedy oracle's next selection: the most correlated block, or the
    /// `k` largest `|Aᵀr|` entries.
    GreedySelection,
    /// The planted support (blocks not yet selected, for block pairs).
    PlantedSupport,
}
