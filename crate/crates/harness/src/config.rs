//! Experiment configuration, read from TOML.
//!
//! Every field has a default (see `configs/default.toml` for the full list
//! with comments), so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mmv_core::data_gen::{SignalModel, TargetRule};
use mmv_core::dnn::{AlgorithmOneOptions, AlgorithmTwoOptions, BlockRefit, HiddenStateMode};
use mmv_core::mimo::{EstimateConfig, GammaPolicy, NoiseLevel, SceneParams};
use mmv_core::neural::AdamConfig;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every scene, pilot, dataset and initialization seed is
    /// derived from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub scene: SceneConfig,
    pub sweep: SweepConfig,
    pub solvers: SolverConfig,
    pub data: DataConfig,
    pub train: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub m_tx: usize,
    pub n_rx: usize,
    /// Pilot length for the SNR sweep.
    pub t_pilots: usize,
    pub sparsity: usize,
    /// When false, each scene has between 1 and `sparsity` active bins.
    pub exact_sparsity: bool,
    pub power_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Snr,
    Pilot,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr_db",
            SweepAxis::Pilot => "t_pilots",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub snr_db: Vec<f64>,
    pub t_pilots: Vec<usize>,
    /// SNR for the pilot sweep; when absent the noise has unit variance and
    /// the pilot power sets the SNR.
    pub pilot_sweep_snr_db: Option<f64>,
    pub trials: usize,
    /// When false the `wall_ms` column is left empty so reruns are
    /// byte-identical.
    pub record_wall_time: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Somp,
    Sp,
    Glasso,
    Alg1,
    Alg2,
    OracleLs,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Somp => "somp",
            SolverKind::Sp => "sp",
            SolverKind::Glasso => "glasso",
            SolverKind::Alg1 => "alg1",
            SolverKind::Alg2 => "alg2",
            SolverKind::OracleLs => "oracle_ls",
        }
    }

    /// The network a learned solver loads, if any.
    pub fn network(self) -> Option<NetKind> {
        match self {
            SolverKind::Alg1 => Some(NetKind::Mlp),
            SolverKind::Alg2 => Some(NetKind::Rnn),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Mlp,
    Rnn,
}

impl NetKind {
    pub fn name(self) -> &'static str {
        match self {
            NetKind::Mlp => "mlp",
            NetKind::Rnn => "rnn",
        }
    }

    pub(crate) fn stream(self) -> u64 {
        match self {
            NetKind::Mlp => 1,
            NetKind::Rnn => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    /// Noise-level threshold when the scene is noisy, `1e-6·‖Y‖` otherwise.
    Auto,
    /// `γ = c·‖Y‖_F`.
    Relative(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefitSpec {
    Accumulated,
    SingleBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenSpec {
    Carry,
    Reset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub list: Vec<SolverKind>,
    pub gamma: GammaSpec,
    pub max_iterations: usize,
    /// λ = f·max_i ‖(AᵀY)_i‖ for each fraction f; the best NMSE is kept.
    pub glasso_lambda_fractions: Vec<f64>,
    pub glasso_iterations: usize,
    pub alg1_refit: RefitSpec,
    pub alg2_hidden: HiddenSpec,
    /// Directory holding `mlp_T{T}.bin` / `rnn_T{T}.bin`; defaults to
    /// `<out_dir>/weights`.
    pub weights_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Greedy,
    Planted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalSpec {
    Real,
    ComplexStacked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Networks to build datasets for.
    pub networks: Vec<NetKind>,
    pub mlp_pairs: usize,
    pub rnn_sequences: usize,
    pub target_rule: TargetSpec,
    /// Longest subspace-pursuit trace per column.
    pub pursuit_iters: usize,
    pub noise_std: f64,
    pub signal: SignalSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_steps: Option<usize>,
    pub mlp_hidden: [usize; 3],
    pub rnn_hidden: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 2019,
            out_dir: PathBuf::from("out"),
            scene: SceneConfig::default(),
            sweep: SweepConfig::default(),
            solvers: SolverConfig::default(),
            data: DataConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            m_tx: 144,
            n_rx: 4,
            t_pilots: 72,
            sparsity: 18,
            exact_sparsity: true,
            power_db: 35.0,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            axis: SweepAxis::Snr,
            snr_db: (0..=7).map(|i| 5.0 * i as f64).collect(),
            t_pilots: vec![24, 36, 48, 60, 72, 84, 96],
            pilot_sweep_snr_db: None,
            trials: 50,
            record_wall_time: true,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            list: vec![
                SolverKind::Somp,
                SolverKind::Sp,
                SolverKind::Glasso,
                SolverKind::Alg1,
                SolverKind::Alg2,
            ],
            gamma: GammaSpec::Auto,
            max_iterations: 100,
            glasso_lambda_fractions: vec![0.3, 0.1, 0.03, 0.01, 0.003],
            glasso_iterations: 300,
            alg1_refit: RefitSpec::Accumulated,
            alg2_hidden: HiddenSpec::Carry,
            weights_dir: None,
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            networks: vec![NetKind::Mlp, NetKind::Rnn],
            mlp_pairs: 15000,
            rnn_sequences: 12000,
            target_rule: TargetSpec::Greedy,
            pursuit_iters: 30,
            noise_std: 0.0,
            signal: SignalSpec::ComplexStacked,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            epochs: adam.epochs,
            batch_size: adam.batch_size,
            max_steps: None,
            mlp_hidden: [256, 256, 256],
            rnn_hidden: 1024,
        }
    }
}

/// One point of the sweep: its value as written to the CSV and the scene
/// parameters it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub params: SceneParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn weights_dir(&self) -> PathBuf {
        self.solvers
            .weights_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("weights"))
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out_dir.join("data")
    }

    /// Pilot lengths the configured sweep needs networks for.
    pub fn pilot_lengths(&self) -> Vec<usize> {
        match self.sweep.axis {
            SweepAxis::Snr => vec![self.scene.t_pilots],
            SweepAxis::Pilot => {
                let mut t = self.sweep.t_pilots.clone();
                t.sort_unstable();
                t.dedup();
                t
            }
        }
    }

    pub fn scene_params(&self, t_pilots: usize, noise: NoiseLevel) -> SceneParams {
        SceneParams {
            m_tx: self.scene.m_tx,
            n_rx: self.scene.n_rx,
            t_pilots,
            sparsity: self.scene.sparsity,
            exact_sparsity: self.scene.exact_sparsity,
            noise,
            power_db: self.scene.power_db,
        }
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        match self.sweep.axis {
            SweepAxis::Snr => self
                .sweep
                .snr_db
                .iter()
                .map(|&s| SweepPoint {
                    value: s,
                    params: self.scene_params(self.scene.t_pilots, NoiseLevel::SnrDb(s)),
                })
                .collect(),
            SweepAxis::Pilot => {
                let noise = self
                    .sweep
                    .pilot_sweep_snr_db
                    .map_or(NoiseLevel::UnitVariance, NoiseLevel::SnrDb);
                self.sweep
                    .t_pilots
                    .iter()
                    .map(|&t| SweepPoint {
                        value: t as f64,
                        params: self.scene_params(t, noise),
                    })
                    .collect()
            }
        }
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig {
            gamma: match self.solvers.gamma {
                GammaSpec::Auto => GammaPolicy::Auto,
                GammaSpec::Relative(c) => GammaPolicy::Relative(c),
            },
            max_iterations: self.solvers.max_iterations,
        }
    }

    pub fn alg1_options(&self) -> AlgorithmOneOptions {
        AlgorithmOneOptions {
            refit: match self.solvers.alg1_refit {
                RefitSpec::Accumulated => BlockRefit::Accumulated,
                RefitSpec::SingleBlock => BlockRefit::SingleBlock,
            },
        }
    }

    pub fn alg2_options(&self) -> AlgorithmTwoOptions {
        AlgorithmTwoOptions {
            hidden: match self.solvers.alg2_hidden {
                HiddenSpec::Carry => HiddenStateMode::CarryAcrossColumns,
                HiddenSpec::Reset => HiddenStateMode::ResetPerColumn,
            },
        }
    }

    pub fn target_rule(&self) -> TargetRule {
        match self.data.target_rule {
            TargetSpec::Greedy => TargetRule::GreedySelection,
            TargetSpec::Planted => TargetRule::PlantedSupport,
        }
    }

    pub fn signal_model(&self) -> SignalModel {
        match self.data.signal {
            SignalSpec::Real => SignalModel::Real,
            SignalSpec::ComplexStacked => SignalModel::ComplexStacked,
        }
    }

    /// Adam settings from `[train]` with the given minibatch-shuffle seed.
    pub fn adam_config(&self, shuffle_seed: u64) -> AdamConfig {
        AdamConfig {
            learning_rate: self.train.learning_rate,
            beta1: self.train.beta1,
            beta2: self.train.beta2,
            epsilon: self.train.epsilon,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            seed: shuffle_seed,
            max_steps: self.train.max_steps,
        }
    }

    /// Rejects configurations that cannot run, before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let sweep = &self.sweep;
        if sweep.trials == 0 {
            return bad("sweep.trials must be at least 1".into());
        }
        match sweep.axis {
            SweepAxis::Snr if sweep.snr_db.is_empty() => return bad("sweep.snr_db is empty".into()),
            SweepAxis::Pilot if sweep.t_pilots.is_empty() => {
                return bad("sweep.t_pilots is empty".into())
            }
            _ => {}
        }
        if sweep.snr_db.iter().any(|s| !s.is_finite())
            || sweep.pilot_sweep_snr_db.is_some_and(|s| !s.is_finite())
        {
            return bad("SNR values must be finite".into());
        }
        if self.solvers.list.is_empty() {
            return bad("solvers.list is empty".into());
        }
        for p in self.sweep_points() {
            p.params
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            // The real-stacked problem has 2T rows and row sparsity 2k.
            if self.scene.sparsity > p.params.t_pilots {
                return bad(format!(
                    "sparsity {} exceeds pilot length {}",
                    self.scene.sparsity, p.params.t_pilots
                ));
            }
        }
        if self.solvers.max_iterations == 0 {
            return bad("solvers.max_iterations must be at least 1".into());
        }
        if let GammaSpec::Relative(c) = self.solvers.gamma {
            if !(c.is_finite() && c >= 0.0) {
                return bad(format!(
                    "solvers.gamma relative factor {c} must be finite and non-negative"
                ));
            }
        }
        if self.solvers.list.contains(&SolverKind::Glasso) {
            let f = &self.solvers.glasso_lambda_fractions;
            if f.is_empty() || f.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return bad(
                    "solvers.glasso_lambda_fractions must be non-empty and positive".into(),
                );
            }
            if self.solvers.glasso_iterations == 0 {
                return bad("solvers.glasso_iterations must be at least 1".into());
            }
        }
        if (self.data.networks.contains(&NetKind::Mlp) && self.data.mlp_pairs == 0)
            || (self.data.networks.contains(&NetKind::Rnn) && self.data.rnn_sequences == 0)
        {
            return bad(
                "data.mlp_pairs and data.rnn_sequences must be positive for the listed networks"
                    .into(),
            );
        }
        if self.data.pursuit_iters == 0 {
            return bad("data.pursuit_iters must be at least 1".into());
        }
        if !(self.data.noise_std.is_finite() && self.data.noise_std >= 0.0) {
            return bad("data.noise_std must be finite and non-negative".into());
        }
        if self.train.rnn_hidden == 0 || self.train.mlp_hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        self.adam_config(0)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn shipped_default_matches_builtin() {
        let text = include_str!("../configs/default.toml");
        assert_eq!(
            ExperimentConfig::from_toml(text).unwrap(),
            ExperimentConfig::default()
        );
        assert!(ExperimentConfig::from_toml(include_str!("../configs/pilot_sweep.toml")).is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.solvers.gamma = GammaSpec::Relative(0.01);
        cfg.sweep.pilot_sweep_snr_db = Some(20.0);
        cfg.solvers.weights_dir = Some("w".into());
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn zero_trials_rejected() {
        let err = ExperimentConfig::from_toml("[sweep]\ntrials = 0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[scene]\nantennas = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("[solvers]\nlist = [\"omp\"]\n").is_err());
    }

    #[test]
    fn pilot_axis_points() {
        let cfg = ExperimentConfig::from_toml("[sweep]\naxis = \"pilot\"\nt_pilots = [36, 96]\n")
            .unwrap();
        let pts = cfg.sweep_points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].value, 96.0);
        assert_eq!(pts[1].params.t_pilots, 96);
        assert_eq!(pts[1].params.noise, NoiseLevel::UnitVariance);
        assert_eq!(cfg.pilot_lengths(), vec![36, 96]);
    }

    #[test]
    fn pilot_shorter_than_sparsity_rejected() {
        assert!(
            ExperimentConfig::from_toml("[sweep]\naxis = \"pilot\"\nt_pilots = [12]\n").is_err()
        );
    }
}
