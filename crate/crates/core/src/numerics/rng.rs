//! Seeded, platform-stable random generation.
//!
//! The bit source is ChaCha8 (`rand_chacha`), whose output is fixed by its
//! specification and independent of platform or word size. Normal variates
//! use the Box–Muller transform, so the whole pipeline from seed to Gaussian
//! sample is pinned to documented algorithms.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::cmat::CMat;
use crate::numerics::mat::Mat;

#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Independent stream keyed by `(seed, path...)`, e.g. `(master, problem_index)`.
    pub fn derived(seed: u64, path: &[u64]) -> Self {
        RngState::new(derive_seed(seed, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer on `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        // Sampled as u64 so 32- and 64-bit targets agree.
        self.inner.gen_range(0..n as u64) as usize
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, returned sorted.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct values from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut out = pool[..k].to_vec();
        out.sort_unstable();
        out
    }
}

/// SplitMix64 finalizer chained over the path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut h = splitmix(seed ^ 0x6d6d_765f_7365_6564);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// I.i.d. `N(0, 1)` entries, filled row-major.
pub fn gaussian(rng: &mut RngState, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.standard_normal())
}

/// I.i.d. circularly-symmetric complex normal entries with unit variance
/// (each component `N(0, 1/2)`).
pub fn complex_gaussian(rng: &mut RngState, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut re = Mat::zeros(rows, cols);
    let mut im = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            re[(i, j)] = s * rng.standard_normal();
            im[(i, j)] = s * rng.standard_normal();
        }
    }
    CMat { re, im }
}
