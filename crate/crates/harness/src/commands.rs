//! The four harness commands.
//!
//! All randomness is derived from the master seed along fixed paths:
//!
//! | stream  | path                               |
//! |---------|------------------------------------|
//! | pilot   | `(seed, 2, T)`                     |
//! | scene   | `(seed, 1, sweep value bits, trial)` |
//! | dataset | `(seed, 3, network, T)`            |
//! | init    | `(seed, 4, network, T)`            |
//! | shuffle | `(seed, 5, network, T)`            |
//!
//! The pilot for a given `T` is therefore the same for dataset generation,
//! training and every evaluation scene, and each scene depends only on the
//! master seed, its sweep value and its trial index.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mmv_core::data_gen::{
    generate_block_pairs_count, generate_residual_pairs_count, save_dataset, Dataset, PlantConfig,
};
use mmv_core::mimo::{
    estimate_channel, generate_pilot, generate_scene_with_pilot, pilot_sensing_matrix,
    ChannelSolver,
};
use mmv_core::neural::{
    adam_train, load_network, mlp_loss_and_grad, rnn_loss_and_grad, save_network, MlpParams,
    Network, ParamSet, RnnParams,
};
use mmv_core::numerics::{derive_seed, CMat, Mat, RngState};

use crate::config::{ExperimentConfig, NetKind, SolverKind};
use crate::error::{HarnessError, Result};
use crate::results::{summarize, write_csv, ResultRow, SummaryRow};

const STREAM_SCENE: u64 = 1;
const STREAM_PILOT: u64 = 2;
const STREAM_DATA: u64 = 3;
const STREAM_INIT: u64 = 4;
const STREAM_SHUFFLE: u64 = 5;

/// The fixed pilot matrix (`M x T`) for pilot length `t`.
pub fn pilot_for(cfg: &ExperimentConfig, t: usize) -> CMat {
    let mut rng = RngState::derived(cfg.seed, &[STREAM_PILOT, t as u64]);
    generate_pilot(cfg.scene.m_tx, t, cfg.scene.power_db, &mut rng)
}

/// Seed of the scene at sweep value `value`, trial `trial`.
pub fn scene_seed(cfg: &ExperimentConfig, value: f64, trial: usize) -> u64 {
    derive_seed(cfg.seed, &[STREAM_SCENE, value.to_bits(), trial as u64])
}

pub fn dataset_path(cfg: &ExperimentConfig, kind: NetKind, t: usize) -> PathBuf {
    cfg.data_dir().join(format!("{}_T{t}.mmvds", kind.name()))
}

pub fn weights_path(cfg: &ExperimentConfig, kind: NetKind, t: usize) -> PathBuf {
    cfg.weights_dir().join(format!("{}_T{t}.bin", kind.name()))
}

/// Whether the subspace-pursuit union (2k real rows of a `2T`-row system)
/// can be refit by least squares: `2·(2·sparsity) <= 2T`.
pub fn pursuit_union_fits(t: usize, sparsity: usize) -> bool {
    2 * sparsity <= t
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

fn plant_config(cfg: &ExperimentConfig) -> PlantConfig {
    PlantConfig {
        num_vectors: cfg.scene.n_rx,
        sparsity: 2 * cfg.scene.sparsity,
        signal: cfg.signal_model(),
        exact_sparsity: cfg.scene.exact_sparsity,
        noise_std: cfg.data.noise_std,
    }
}

#[derive(Clone, Debug, Default)]
pub struct GenDataReport {
    pub files: Vec<PathBuf>,
    /// Datasets not generated, with the reason.
    pub skipped: Vec<String>,
}

/// Writes a training set for every configured network and pilot length the
/// sweep needs (`<out_dir>/data/{mlp,rnn}_T{T}.mmvds`), plus an inspection
/// CSV next to each when `csv` is set.
pub fn gen_data(cfg: &ExperimentConfig, csv: bool) -> Result<GenDataReport> {
    cfg.validate()?;
    create_dir(&cfg.data_dir())?;
    let plant = plant_config(cfg);
    let mut report = GenDataReport::default();
    for t in cfg.pilot_lengths() {
        let a = pilot_sensing_matrix(&pilot_for(cfg, t))?;
        for &kind in &cfg.data.networks {
            let seed = derive_seed(cfg.seed, &[STREAM_DATA, kind.stream(), t as u64]);
            let data = match kind {
                NetKind::Mlp => Dataset::Block(generate_block_pairs_count(
                    &a,
                    &plant,
                    cfg.target_rule(),
                    cfg.data.mlp_pairs,
                    seed,
                )?),
                NetKind::Rnn if !pursuit_union_fits(t, cfg.scene.sparsity) => {
                    report.skipped.push(format!(
                        "rnn at T={t}: subspace pursuit needs T >= 2*sparsity = {}",
                        2 * cfg.scene.sparsity
                    ));
                    continue;
                }
                NetKind::Rnn => Dataset::Residual(generate_residual_pairs_count(
                    &a,
                    &plant,
                    cfg.target_rule(),
                    cfg.data.rnn_sequences,
                    cfg.data.pursuit_iters,
                    seed,
                )?),
            };
            let path = dataset_path(cfg, kind, t);
            save_dataset(&path, &data)?;
            report.files.push(path.clone());
            if csv {
                let csv_path = path.with_extension("csv");
                export_dataset_csv(&csv_path, &data)?;
                report.files.push(csv_path);
            }
        }
    }
    Ok(report)
}

fn join_values(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 8);
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x}").expect("writing to a String cannot fail");
    }
    s
}

/// One CSV row per stored vector: `item,column,field,values` with the values
/// space-separated. Block pairs have no column and leave it empty.
pub fn export_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    let mut put = |rec: [&str; 4]| w.write_record(rec).map_err(|e| HarnessError::csv(path, e));
    put(["item", "column", "field", "values"])?;
    match data {
        Dataset::Block(set) => {
            for (i, p) in set.pairs.iter().enumerate() {
                let i = i.to_string();
                put([&i, "", "input", &join_values(&p.input)])?;
                put([&i, "", "target", &join_values(&p.target)])?;
            }
        }
        Dataset::Residual(set) => {
            for (i, s) in set.sequences.iter().enumerate() {
                let i = i.to_string();
                for (j, x) in s.inputs.iter().enumerate() {
                    put([&i, &j.to_string(), "input", &join_values(x)])?;
                }
                for (j, x) in s.targets.iter().enumerate() {
                    put([&i, &j.to_string(), "target", &join_values(x)])?;
                }
            }
        }
    }
    drop(put);
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub weights: PathBuf,
    pub loss_csv: PathBuf,
    /// Mean loss of each epoch.
    pub curve: Vec<f64>,
}

#[derive(serde::Serialize)]
struct LossRow {
    epoch: usize,
    mean_loss: f64,
}

/// Trains network `kind` on `dataset` with the `[train]` settings and writes
/// the weights (to `weights_out`, or `<weights_dir>/{kind}_T{T}.bin`) and a
/// `epoch,mean_loss` curve next to them.
pub fn train(
    cfg: &ExperimentConfig,
    kind: NetKind,
    dataset: &Path,
    weights_out: Option<&Path>,
) -> Result<TrainReport> {
    cfg.validate()?;
    let data = mmv_core::data_gen::load_dataset(dataset)?;
    let meta = data.meta().clone();
    if data.is_empty() {
        return Err(HarnessError::Runtime(format!(
            "dataset {} is empty",
            dataset.display()
        )));
    }
    // The measurement dimension is 2T for both dataset kinds.
    let t = meta.m / 2;
    let init_seed = derive_seed(cfg.seed, &[STREAM_INIT, kind.stream(), t as u64]);
    let adam = cfg.adam_config(derive_seed(
        cfg.seed,
        &[STREAM_SHUFFLE, kind.stream(), t as u64],
    ));
    let mut rng = RngState::new(init_seed);
    let (net, curve) = match (kind, data) {
        (NetKind::Mlp, Dataset::Block(set)) => {
            let k = meta.num_vectors;
            let p = MlpParams::init(meta.m * k, cfg.train.mlp_hidden, meta.n * k, &mut rng);
            let (p, curve) = adam_train(p, &set.pairs, &adam, |p, b| mlp_loss_and_grad(p, b))?;
            (Network::Mlp(p), curve)
        }
        (NetKind::Rnn, Dataset::Residual(set)) => {
            let p = RnnParams::init(meta.m, cfg.train.rnn_hidden, meta.n, &mut rng);
            let (p, curve) = adam_train(p, &set.sequences, &adam, |p, b| rnn_loss_and_grad(p, b))?;
            (Network::Rnn(p), curve)
        }
        (kind, _) => {
            return Err(HarnessError::Runtime(format!(
                "dataset {} does not hold {} training data",
                dataset.display(),
                kind.name()
            )))
        }
    };
    let weights = weights_out.map_or_else(|| weights_path(cfg, kind, t), Path::to_path_buf);
    if let Some(dir) = weights.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    save_network(&weights, &net)?;
    let stem = weights
        .file_stem()
        .map_or_else(|| "weights".into(), |s| s.to_string_lossy().into_owned());
    let loss_csv = weights.with_file_name(format!("{stem}_loss.csv"));
    let rows: Vec<LossRow> = curve
        .iter()
        .enumerate()
        .map(|(i, &mean_loss)| LossRow {
            epoch: i + 1,
            mean_loss,
        })
        .collect();
    write_csv(&loss_csv, &rows)?;
    Ok(TrainReport {
        weights,
        loss_csv,
        curve,
    })
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub results_csv: PathBuf,
    pub summary_csv: PathBuf,
}

/// Loaded networks by (kind, T). `None` marks a learned solver that cannot
/// run at that pilot length, so its rows are recorded as errors.
type NetworkTable = BTreeMap<(u8, usize), Option<Network>>;

fn net_key(kind: NetKind) -> u8 {
    kind.stream() as u8
}

fn load_networks(cfg: &ExperimentConfig) -> Result<NetworkTable> {
    let mut table = NetworkTable::new();
    let (k, n_rx) = (cfg.scene.sparsity, cfg.scene.n_rx);
    for kind in cfg.solvers.list.iter().filter_map(|s| s.network()) {
        for t in cfg.pilot_lengths() {
            if table.contains_key(&(net_key(kind), t)) {
                continue;
            }
            let path = weights_path(cfg, kind, t);
            if kind == NetKind::Rnn && !pursuit_union_fits(t, k) && !path.exists() {
                table.insert((net_key(kind), t), None);
                continue;
            }
            if !path.exists() {
                return Err(HarnessError::Runtime(format!(
                    "missing weights {} (run gen-data and train first)",
                    path.display()
                )));
            }
            let net = load_network(&path)?;
            let (m, n) = (2 * t, 2 * cfg.scene.m_tx);
            let fits = match (&net, kind) {
                (Network::Mlp(p), NetKind::Mlp) => p.d_in() == m * n_rx && p.d_out() == n * n_rx,
                (Network::Rnn(p), NetKind::Rnn) => p.d_in() == m && p.d_out() == n,
                _ => false,
            };
            if !fits {
                return Err(HarnessError::Runtime(format!(
                    "weights {} do not fit a {kind:?} for T = {t}, M = {}, N = {n_rx}",
                    path.display(),
                    cfg.scene.m_tx
                )));
            }
            table.insert((net_key(kind), t), Some(net));
        }
    }
    Ok(table)
}

fn solver_for<'a>(
    cfg: &ExperimentConfig,
    kind: SolverKind,
    net: Option<&'a Network>,
) -> Option<ChannelSolver<'a>> {
    Some(match kind {
        SolverKind::Somp => ChannelSolver::Somp,
        SolverKind::Sp => ChannelSolver::SubspacePursuit,
        SolverKind::Glasso => ChannelSolver::GroupLasso {
            lambda_fractions: cfg.solvers.glasso_lambda_fractions.clone(),
            iterations: cfg.solvers.glasso_iterations,
        },
        SolverKind::OracleLs => ChannelSolver::OracleLs,
        SolverKind::Alg1 => match net? {
            Network::Mlp(mlp) => ChannelSolver::AlgorithmOne {
                mlp,
                options: cfg.alg1_options(),
            },
            Network::Rnn(_) => return None,
        },
        SolverKind::Alg2 => match net? {
            Network::Rnn(rnn) => ChannelSolver::AlgorithmTwo {
                rnn,
                options: cfg.alg2_options(),
            },
            Network::Mlp(_) => return None,
        },
    })
}

/// Runs every configured solver on every (sweep point, trial) scene and
/// writes `results.csv` and `summary.csv` to the output directory. Solver
/// failures become rows with an error message; no training happens here.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let networks = load_networks(cfg)?;
    let pilots: BTreeMap<usize, CMat> = cfg
        .pilot_lengths()
        .into_iter()
        .map(|t| (t, pilot_for(cfg, t)))
        .collect();
    let est_cfg = cfg.estimate_config();
    let axis = cfg.sweep.axis.name();
    let mut rows = Vec::new();
    for point in cfg.sweep_points() {
        let t = point.params.t_pilots;
        for trial in 0..cfg.sweep.trials {
            let seed = scene_seed(cfg, point.value, trial);
            let scene =
                generate_scene_with_pilot(&point.params, &pilots[&t], &mut RngState::new(seed))?;
            for &kind in &cfg.solvers.list {
                let net = kind
                    .network()
                    .and_then(|nk| networks.get(&(net_key(nk), t)).and_then(Option::as_ref));
                let mut row = ResultRow {
                    solver: kind.name().to_string(),
                    sweep_axis: axis.to_string(),
                    sweep_value: point.value,
                    trial,
                    seed,
                    nmse: None,
                    iterations: None,
                    wall_ms: None,
                    error: None,
                };
                let Some(solver) = solver_for(cfg, kind, net) else {
                    row.error = Some(format!("no trained network for T = {t}"));
                    rows.push(row);
                    continue;
                };
                let start = Instant::now();
                let outcome = estimate_channel(&scene, &solver, cfg.scene.sparsity, &est_cfg);
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                match outcome {
                    Ok(est) if est.nmse.is_finite() => {
                        row.nmse = Some(est.nmse);
                        row.iterations = Some(est.iterations);
                        row.wall_ms = cfg.sweep.record_wall_time.then_some(elapsed);
                    }
                    Ok(est) => row.error = Some(format!("non-finite nmse {}", est.nmse)),
                    Err(e) => row.error = Some(e.to_string()),
                }
                rows.push(row);
            }
        }
    }
    create_dir(&cfg.out_dir)?;
    let summary = summarize(&rows);
    let results_csv = cfg.out_dir.join("results.csv");
    let summary_csv = cfg.out_dir.join("summary.csv");
    write_csv(&results_csv, &rows)?;
    write_csv(&summary_csv, &summary)?;
    Ok(RunReport {
        rows,
        summary,
        results_csv,
        summary_csv,
    })
}

/// Human-readable description of a weight file: kind, matrix shapes,
/// parameter count and simple value statistics.
pub fn inspect_weights(path: &Path) -> Result<String> {
    let net = load_network(path)?;
    let mut out = String::new();
    let _ = writeln!(out, "{}: {} network", path.display(), net.kind_name());
    let mut total = 0;
    for (name, rows, cols) in net.shapes() {
        let _ = writeln!(out, "  {name:<5} {rows} x {cols}");
        total += rows * cols;
    }
    let tensors = match &net {
        Network::Mlp(p) => p.tensors(),
        Network::Rnn(p) => p.tensors(),
    };
    let values: Vec<f64> = tensors.concat();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len().max(1) as f64).sqrt();
    let _ = writeln!(
        out,
        "  parameters {total}, rms {rms:.6e}, max |w| {max_abs:.6e}"
    );
    Ok(out)
}

/// Sensing matrix seen by every scene at pilot length `t` (real-stacked).
pub fn sensing_matrix(cfg: &ExperimentConfig, t: usize) -> Result<Mat> {
    Ok(pilot_sensing_matrix(&pilot_for(cfg, t))?)
}
