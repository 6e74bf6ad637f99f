use crate::classic::sp::{correlate, init_column, update_column};
use crate::data_gen::plant::{plant_problem, PlantConfig, PlantedProblem};
use crate::data_gen::{DatasetMeta, PairOrigin, TargetRule};
use crate::error::{Error, Result};
use crate::neural::{scale_to_unit_rms, SequencePair};
use crate::numerics::{norm2, top_k_indices, Mat, RngState};

/// Length-`K` sequences for the subspace-pursuit RNN: step `j` of a sequence
/// is column `j`'s residual (length `m`, scaled to unit RMS) with a 0/1
/// indicator target of length `n`. Sequence `s` of a problem is that
/// problem's `s`-th pursuit iteration across all columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPairSet {
    pub meta: DatasetMeta,
    pub sequences: Vec<SequencePair>,
    /// `origins[s].step` is the pursuit iteration; empty for loaded sets.
    pub origins: Vec<PairOrigin>,
}

/// One column's generator trajectory: the residual seen at each iteration
/// and the indices its target marks.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnTrace {
    pub residuals: Vec<Vec<f64>>,
    pub targets: Vec<Vec<usize>>,
}

/// Runs per-column subspace pursuit on `y` and records each residual that is
/// still above `gamma`.
///
/// Iteration 0 sees `y` itself and the support of the `k` largest `|aᵀy|`;
/// each later iteration sees the projection residual of the current support,
/// marks the `k` largest `|aᵀr|` (or the planted support), and advances the
/// support by one pursuit update. The trace ends when the residual falls to
/// `gamma`, when an update fails to decrease it, or after `iters` entries.
pub fn column_trace(
    a: &Mat,
    y: &[f64],
    k: usize,
    iters: usize,
    gamma: f64,
    rule: TargetRule,
    planted_support: &[usize],
) -> Result<ColumnTrace> {
    let mut trace = ColumnTrace {
        residuals: Vec::new(),
        targets: Vec::new(),
    };
    let target = |r: &[f64]| -> Result<Vec<usize>> {
        Ok(match rule {
            TargetRule::GreedySelection => {
                let c: Vec<f64> = correlate(a, r)?.iter().map(|v| v.abs()).collect();
                top_k_indices(&c, k)
            }
            TargetRule::PlantedSupport => planted_support.to_vec(),
        })
    };
    if iters == 0 || norm2(y) <= gamma || norm2(y) == 0.0 {
        return Ok(trace);
    }
    trace.residuals.push(y.to_vec());
    trace.targets.push(target(y)?);
    let mut state = init_column(a, y, k)?;
    while trace.residuals.len() < iters && state.residual_norm > gamma {
        let r = state.residual.clone();
        trace.targets.push(target(&r)?);
        trace.residuals.push(r);
        let scores = correlate(a, &state.residual)?;
        let next = update_column(a, y, &state, &scores, k)?;
        if next.residual_norm >= state.residual_norm {
            break;
        }
        state = next;
    }
    Ok(trace)
}

/// Truncates every part to the length of the shortest one, dropping the
/// latest entries, so all parts hold the same number of items.
pub fn equalize_parts<T>(mut parts: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let common = parts.iter().map(Vec::len).min().unwrap_or(0);
    for p in &mut parts {
        p.truncate(common);
    }
    parts
}

fn indicator(n: usize, idx: &[usize]) -> Vec<f64> {
    let mut t = vec![0.0; n];
    for &i in idx {
        t[i] = 1.0;
    }
    t
}

/// Stopping threshold for a generator column: noise-aware when the plant
/// carries noise, otherwise relative to the column norm.
fn column_gamma(plant: &PlantConfig, m: usize, y: &[f64]) -> f64 {
    if plant.noise_std > 0.0 {
        (m as f64).sqrt() * plant.noise_std
    } else {
        1e-6 * norm2(y)
    }
}

fn sequences_for_problem(
    a: &Mat,
    problem: &PlantedProblem,
    plant: &PlantConfig,
    rule: TargetRule,
    iters: usize,
) -> Result<Vec<SequencePair>> {
    let k_vec = problem.y.cols();
    let mut parts = Vec::with_capacity(k_vec);
    for j in 0..k_vec {
        let y = problem.y.column(j);
        let gamma = column_gamma(plant, a.rows(), &y);
        let tr = column_trace(a, &y, plant.sparsity, iters, gamma, rule, &problem.support)?;
        let steps: Vec<(Vec<f64>, Vec<f64>)> = tr
            .residuals
            .iter()
            .zip(&tr.targets)
            .map(|(r, t)| (scale_to_unit_rms(r), indicator(a.cols(), t)))
            .collect();
        parts.push(steps);
    }
    let parts = equalize_parts(parts);
    let len = parts.first().map_or(0, Vec::len);
    Ok((0..len)
        .map(|s| SequencePair {
            inputs: parts.iter().map(|p| p[s].0.clone()).collect(),
            targets: parts.iter().map(|p| p[s].1.clone()).collect(),
        })
        .collect())
}

/// Sequences from `num_problems` planted problems (stream `(seed, p)` for
/// problem `p`), each traced for at most `iters` pursuit iterations.
pub fn generate_residual_pairs(
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    num_problems: usize,
    iters: usize,
    seed: u64,
) -> Result<ResidualPairSet> {
    let mut set = empty_set(a, plant, seed)?;
    for p in 0..num_problems {
        push_problem(&mut set, a, plant, rule, iters, p)?;
    }
    Ok(set)
}

/// Generates problems in index order until `count` sequences exist, then
/// drops the surplus of the last problem.
pub fn generate_residual_pairs_count(
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    count: usize,
    iters: usize,
    seed: u64,
) -> Result<ResidualPairSet> {
    let mut set = empty_set(a, plant, seed)?;
    let max_problems = 100 * count + 100;
    let mut p = 0;
    while set.sequences.len() < count {
        if p == max_problems {
            return Err(Error::invalid(
                "planted problems keep producing no sequences",
            ));
        }
        push_problem(&mut set, a, plant, rule, iters, p)?;
        p += 1;
    }
    set.sequences.truncate(count);
    set.origins.truncate(count);
    Ok(set)
}

fn empty_set(a: &Mat, plant: &PlantConfig, seed: u64) -> Result<ResidualPairSet> {
    plant.validate(a)?;
    Ok(ResidualPairSet {
        meta: DatasetMeta {
            m: a.rows(),
            n: a.cols(),
            num_vectors: plant.num_vectors,
            sparsity: plant.sparsity,
            seed,
        },
        sequences: Vec::new(),
        origins: Vec::new(),
    })
}

fn push_problem(
    set: &mut ResidualPairSet,
    a: &Mat,
    plant: &PlantConfig,
    rule: TargetRule,
    iters: usize,
    p: usize,
) -> Result<()> {
    let mut rng = RngState::derived(set.meta.seed, &[p as u64]);
    let problem = plant_problem(a, plant, &mut rng)?;
    for (step, s) in sequences_for_problem(a, &problem, plant, rule, iters)?
        .into_iter()
        .enumerate()
    {
        set.sequences.push(s);
        set.origins.push(PairOrigin { problem: p, step });
    }
    Ok(())
}

impl ResidualPairSet {
    /// Number of (input, target) pairs held for each column ("part").
    pub fn part_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.meta.num_vectors];
        for s in &self.sequences {
            for (j, _) in s.inputs.iter().enumerate() {
                counts[j] += 1;
            }
        }
        counts
    }

    /// Regenerates every referenced problem and checks each stored sequence
    /// is reproduced bit for bit.
    pub fn replay_check(
        &self,
        a: &Mat,
        plant: &PlantConfig,
        rule: TargetRule,
        iters: usize,
    ) -> Result<()> {
        if self.origins.len() != self.sequences.len() {
            return Err(Error::invalid(
                "sequence set carries no provenance to replay",
            ));
        }
        let mut cached: Option<(usize, Vec<SequencePair>)> = None;
        for (seq, origin) in self.sequences.iter().zip(&self.origins) {
            if cached.as_ref().map(|c| c.0) != Some(origin.problem) {
                let mut rng = RngState::derived(self.meta.seed, &[origin.problem as u64]);
                let problem = plant_problem(a, plant, &mut rng)?;
                cached = Some((
                    origin.problem,
                    sequences_for_problem(a, &problem, plant, rule, iters)?,
                ));
            }
            let replayed = &cached.as_ref().expect("filled above").1;
            if replayed.get(origin.step) != Some(seq) {
                return Err(Error::Malformed(format!(
                    "sequence for problem {} step {} does not replay",
                    origin.problem, origin.step
                )));
            }
        }
        Ok(())
    }
}
