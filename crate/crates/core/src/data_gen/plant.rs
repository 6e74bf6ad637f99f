use crate::error::{Error, Result};
use crate::numerics::{Mat, RngState};

/// How planted rows are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalModel {
    /// Independent real rows; the support is any `k` of the `n` rows.
    Real,
    /// Real stacking `[Re; Im]` of a complex signal with `n/2` complex rows:
    /// row `j` and row `j + n/2` are always planted together, and the gains
    /// are circularly-symmetric complex normals. `k` counts real rows and
    /// must be even.
    ComplexStacked,
}

/// Distribution of the synthetic jointly sparse problems `Y = A·X (+ σ·N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantConfig {
    /// `K`, the number of measurement vectors.
    pub num_vectors: usize,
    /// Row sparsity `k` (real rows).
    pub sparsity: usize,
    pub signal: SignalModel,
    /// When false, the support size is drawn uniformly from `1..=k`.
    pub exact_sparsity: bool,
    /// Standard deviation of additive measurement noise (0 = noiseless).
    pub noise_std: f64,
}

impl PlantConfig {
    pub fn real(num_vectors: usize, sparsity: usize) -> Self {
        PlantConfig {
            num_vectors,
            sparsity,
            signal: SignalModel::Real,
            exact_sparsity: true,
            noise_std: 0.0,
        }
    }

    pub fn validate(&self, a: &Mat) -> Result<()> {
        let (m, n) = a.shape();
        if self.num_vectors == 0 {
            return Err(Error::invalid("num_vectors must be at least 1"));
        }
        if self.sparsity == 0 || self.sparsity > m || m > n {
            return Err(Error::invalid(format!(
                "need 1 <= k <= m <= n, got k = {}, m = {m}, n = {n}",
                self.sparsity
            )));
        }
        if self.signal == SignalModel::ComplexStacked && (n % 2 != 0 || self.sparsity % 2 != 0) {
            return Err(Error::invalid(
                "complex-stacked signals need an even signal dimension and an even k",
            ));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::invalid("noise_std must be finite and non-negative"));
        }
        if let Some(j) = a.column_norms().iter().position(|&c| c == 0.0) {
            return Err(Error::invalid(format!(
                "degenerate sensing matrix: column {j} is zero"
            )));
        }
        Ok(())
    }
}

/// One planted instance with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedProblem {
    pub x: Mat,
    pub y: Mat,
    /// Sorted joint support of `x`.
    pub support: Vec<usize>,
}

/// Draws one jointly sparse `X` (all columns share the support) and `Y = A·X`
/// plus optional noise. The support is uniform without replacement; gains are
/// standard normal.
pub fn plant_problem(a: &Mat, cfg: &PlantConfig, rng: &mut RngState) -> Result<PlantedProblem> {
    cfg.validate(a)?;
    let n = a.cols();
    let k_vec = cfg.num_vectors;
    let mut x = Mat::zeros(n, k_vec);
    let support = match cfg.signal {
        SignalModel::Real => {
            let size = if cfg.exact_sparsity {
                cfg.sparsity
            } else {
                1 + rng.below(cfg.sparsity)
            };
            let support = rng.sample_without_replacement(n, size);
            for &i in &support {
                for j in 0..k_vec {
                    x[(i, j)] = rng.standard_normal();
                }
            }
            support
        }
        SignalModel::ComplexStacked => {
            let half = n / 2;
            let pairs = if cfg.exact_sparsity {
                cfg.sparsity / 2
            } else {
                1 + rng.below(cfg.sparsity / 2)
            };
            let atoms = rng.sample_without_replacement(half, pairs);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for &i in &atoms {
                for j in 0..k_vec {
                    x[(i, j)] = s * rng.standard_normal();
                    x[(i + half, j)] = s * rng.standard_normal();
                }
            }
            let mut support: Vec<usize> = atoms
                .iter()
                .copied()
                .chain(atoms.iter().map(|i| i + half))
                .collect();
            support.sort_unstable();
            support
        }
    };
    let mut y = a.matmul(&x)?;
    if cfg.noise_std > 0.0 {
        for v in y.as_mut_slice() {
            *v += cfg.noise_std * rng.standard_normal();
        }
    }
    Ok(PlantedProblem { x, y, support })
}
