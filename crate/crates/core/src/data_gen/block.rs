use crate::data_gen::plant::{plant_problem, PlantConfig, PlantedProblem};
use crate::data_gen::{DatasetMeta, PairOrigin, TargetRule};
use crate::error::{Error, Result};
use crate::neural::{scale_to_unit_rms, TrainingPair};
use crate::numerics::{argmax_where, projection_residual, stack_rows, Mat, RngState};

/// Residual/indicator pairs for the block-pursuit MLP. Inputs are the stacked
/// residuals `vec(Rᵀ)` (length `m·K`, scaled to unit RMS); targets are 0/1
/// block indicators of length `n·K`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPairSet {
    pub meta: DatasetMeta,
    pub pairs: Vec<TrainingPair>,
    /// Where each pair came from; empty for sets loaded from disk.
    pub origins: Vec<PairOrigin>,
}

/// One greedy block-pursuit step as seen by the generator.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStep {
    /// Unscaled stacked residual fed to the network.
    pub residual: Vec<f64>,
    /// Block chosen by block correlation at this step.
    pub selected: usize,
    /// Blocks marked in the target.
    pub target_blocks: Vec<usize>,
}

/// Block-OMP trajectory of one problem: at each of up to `k` steps the block
/// `b` maximizing `‖Φ[b]ᵀ r‖₂` (the row norm of `AᵀR`) is selected among the
/// blocks not yet chosen, and the residual is refreshed by a least-squares
/// fit over all chosen blocks. `y = 0` yields no steps.
pub fn block_trace(
    a: &Mat,
    y: &Mat,
    k: usize,
    rule: TargetRule,
    planted_support: &[usize],
) -> Result<Vec<BlockStep>> {
    let y_norm = y.frobenius_norm();
    let floor = 1e-10 * y_norm;
    let mut steps = Vec::with_capacity(k);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut residual = y.clone();
    for _ in 0..k {
        if y_norm == 0.0 || residual.frobenius_norm() <= floor {
            break;
        }
        let scores = a.t_matmul(&residual)?.row_norms();
        let Some(b) = argmax_where(&scores, |i| !chosen.contains(&i)) else {
            break;
        };
        let target_blocks = match rule {
            TargetRule::GreedySelection => vec![b],
            TargetRule::PlantedSupport => planted_support
                .iter()
                .copied()
                .filter(|i| !chosen.contains(i))
                .collect(),
        };
        steps.push(BlockStep {
            residual: stack_rows(&residual).into_vec(),
            selected: b,
            target_blocks,
        });
        chosen.push(b);
        let mut sorted = chosen.clone();
        sorted.sort_unstable();
        residual = projection_residual(&a.select_columns(&sorted), y)?;
    }
    Ok(steps)
}

fn block_indicator(n: usize, k_vec: usize, blocks: &[usize]) -> Vec<f64> {
    let mut t = vec![0.0; n * k_vec];
    for &b in blocks {
        t[b * k_vec..(b + 1) * k_vec].fill(1.0);
    }
    t
}

fn pairs_for_problem(
    a: &Mat,
    problem: &PlantedProblem,
    plant: &PlantConfig,
    rule: TargetRule,
) -> Result<Vec<TrainingPair>> {
    let steps = block_trace(a, &problem.y, plant.sparsity, rule, &problem.support)?;
    Ok(steps
        .into_iter()
        .map(|s| TrainingPair {
            input: scale_to_unit_rms(&s.residual),
            target: block_indicator(a.cols(), plant.num_vectors, &s.target_blocks),
        })
        .collect())
}

/// Pairs from `num_problems` planted problems; problem `p` draws from the
/// stream derived from `(seed, p)`. With exact sparsity and generic `a`, each
/// problem yields exactly `k` pairs.
pub fn generate_block_pairs(
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    num_problems: usize,
    seed: u64,
) -> Result<BlockPairSet> {
    let mut set = empty_set(a, plant, seed)?;
    for p in 0..num_problems {
        push_problem(&mut set, a, plant, rule, p)?;
    }
    Ok(set)
}

/// Generates problems in index order until `count` pairs exist, then drops
/// the surplus pairs of the last problem.
pub fn generate_block_pairs_count(
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    count: usize,
    seed: u64,
) -> Result<BlockPairSet> {
    let mut set = empty_set(a, plant, seed)?;
    let max_problems = 100 * count + 100;
    let mut p = 0;
    while set.pairs.len() < count {
        if p == max_problems {
            return Err(Error::invalid(
                "planted problems keep producing no block pairs",
            ));
        }
        push_problem(&mut set, a, plant, rule, p)?;
        p += 1;
    }
    set.pairs.truncate(count);
    set.origins.truncate(count);
    Ok(set)
}

fn empty_set(a: &Mat, plant: &PlantConfig, seed: u64) -> Result<BlockPairSet> {
    plant.validate(a)?;
    Ok(BlockPairSet {
        meta: DatasetMeta {
            m: a.rows(),
            n: a.cols(),
            num_vectors: plant.num_vectors,
            sparsity: plant.sparsity,
            seed,
        },
        pairs: Vec::new(),
        origins: Vec::new(),
    })
}

fn push_problem(
    set: &mut BlockPairSet,
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    p: usize,
) -> Result<()> {
    let mut rng = RngState::derived(set.meta.seed, &[p as u64]);
    let problem = plant_problem(a, plant, &mut rng)?;
    for (step, pair) in pairs_for_problem(a, &problem, plant, rule)?
        .into_iter()
        .enumerate()
    {
        set.pairs.push(pair);
        set.origins.push(PairOrigin { problem: p, step });
    }
    Ok(())
}

impl BlockPairSet {
    /// Regenerates every referenced problem from `(seed, problem)` and checks
    /// that each stored pair is reproduced bit for bit.
    pub fn replay_check(&self, a: &Mat, plant: &PlantConfig, rule: TargetRule) -> Result<()> {
        if self.origins.len() != self.pairs.len() {
            return Err(Error::invalid("pair set carries no provenance to replay"));
        }
        let mut cached: Option<(usize, Vec<TrainingPair>)> = None;
        for (pair, origin) in self.pairs.iter().zip(&self.origins) {
            if cached.as_ref().map(|c| c.0) != Some(origin.problem) {
                let mut rng = RngState::derived(self.meta.seed, &[origin.problem as u64]);
                let problem = plant_problem(a, plant, &mut rng)?;
                cached = Some((origin.problem, pairs_for_problem(a, &problem, plant, rule)?));
            }
            let replayed = &cached.as_ref().expect("filled above").1;
            if replayed.get(origin.step) != Some(pair) {
                return Err(Error::Malformed(format!(
                    "pair for problem {} step {} does not replay",
                    origin.problem, origin.step
                )));
            }
        }
        Ok(())
    }
}
