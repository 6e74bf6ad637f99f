use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmv_harness::{commands, median, read_csv, ExperimentConfig, NetKind, ResultRow, SummaryRow};

fn mmvnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmvnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    let text = format!(
        "out_dir = {:?}\n{body}",
        dir.join("out").display().to_string()
    );
    std::fs::write(&path, text).unwrap();
    path
}

const TINY: &str = r#"
[scene]
m_tx = 16
n_rx = 2
t_pilots = 8
sparsity = 2
power_db = 10.0

[sweep]
snr_db = [20.0]
trials = 2
record_wall_time = false

[solvers]
list = ["somp", "sp", "alg1", "alg2"]
glasso_iterations = 50

[data]
mlp_pairs = 40
rnn_sequences = 30
pursuit_iters = 5

[train]
epochs = 1
batch_size = 8
mlp_hidden = [6, 6, 6]
rnn_hidden = 6
"#;

#[test]
fn zero_trials_is_a_config_error_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sweep]\ntrials = 0\n");
    for cmd in ["gen-data", "run"] {
        let out = mmvnet(&["--config", cfg.to_str().unwrap(), cmd]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unparsable_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = \"many\"\n").unwrap();
    assert_eq!(
        mmvnet(&["--config", cfg.to_str().unwrap(), "run"])
            .status
            .code(),
        Some(1)
    );
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        mmvnet(&["--config", missing.to_str().unwrap(), "run"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_weights_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = mmvnet(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing weights"));
    let out = mmvnet(&[
        "inspect-weights",
        dir.path().join("none.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn minimal_run_gives_one_row_and_one_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY
        .replace(
            r#"list = ["somp", "sp", "alg1", "alg2"]"#,
            r#"list = ["somp"]"#,
        )
        .replace("trials = 2", "trials = 1");
    let cfg = write_config(dir.path(), &body);
    let out = mmvnet(&["--config", cfg.to_str().unwrap(), "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<ResultRow> = read_csv(&dir.path().join("out/results.csv")).unwrap();
    let summary: Vec<SummaryRow> = read_csv(&dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(summary.len(), 1);
    assert_eq!(rows[0].solver, "somp");
    assert!(rows[0].nmse.unwrap() >= 0.0);
    assert_eq!(rows[0].wall_ms, None);
}

#[test]
fn full_pipeline_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let c = cfg.to_str().unwrap();
    let out = mmvnet(&["--config", c, "gen-data", "--csv"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let data = dir.path().join("out/data");
    assert!(data.join("mlp_T8.mmvds").exists() && data.join("rnn_T8.csv").exists());
    for kind in ["mlp", "rnn"] {
        let ds = data.join(format!("{kind}_T8.mmvds"));
        let out = mmvnet(&[
            "--config",
            c,
            "train",
            "--kind",
            kind,
            "--dataset",
            ds.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let curve =
            std::fs::read_to_string(dir.path().join(format!("out/weights/{kind}_T8_loss.csv")))
                .unwrap();
        assert_eq!(curve.lines().count(), 2, "one epoch -> header plus one row");
        assert!(curve.starts_with("epoch,mean_loss\n1,"));
    }
    let out = mmvnet(&[
        "inspect-weights",
        dir.path().join("out/weights/rnn_T8.bin").to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rnn network"));
    // Training an MLP on sequence data is a shape error.
    let out = mmvnet(&[
        "--config",
        c,
        "train",
        "--kind",
        "mlp",
        "--dataset",
        data.join("rnn_T8.mmvds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = mmvnet(&["--config", c, "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<ResultRow> = read_csv(&dir.path().join("out/results.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 4);
    // Paired design: one scene seed per trial, shared by every solver.
    for trial in 0..2 {
        let seeds: Vec<u64> = rows
            .iter()
            .filter(|r| r.trial == trial)
            .map(|r| r.seed)
            .collect();
        assert_eq!(seeds.len(), 4);
        assert!(seeds.iter().all(|&s| s == seeds[0]));
    }
    assert_ne!(rows[0].seed, rows[4].seed);
    // Summary medians are recomputable from the data rows.
    let summary: Vec<SummaryRow> = read_csv(&dir.path().join("out/summary.csv")).unwrap();
    for s in &summary {
        let nmse: Vec<f64> = rows
            .iter()
            .filter(|r| r.solver == s.solver)
            .filter_map(|r| r.nmse)
            .collect();
        assert_eq!(s.median_nmse, median(&nmse));
    }
}

#[test]
fn seed_and_out_dir_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY.replace(
        r#"list = ["somp", "sp", "alg1", "alg2"]"#,
        r#"list = ["somp"]"#,
    );
    let cfg = write_config(dir.path(), &body);
    let other = dir.path().join("elsewhere");
    let run = |seed: &str| {
        let out = mmvnet(&[
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out-dir",
            other.to_str().unwrap(),
            "run",
        ]);
        assert!(out.status.success());
        read_csv::<ResultRow>(&other.join("results.csv")).unwrap()
    };
    let a = run("1");
    let b = run("2");
    assert_ne!(a[0].seed, b[0].seed);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn pilot_sweep_records_infeasible_points_as_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml(TINY).unwrap();
    cfg.out_dir = dir.path().to_path_buf();
    cfg.sweep.axis = mmv_harness::SweepAxis::Pilot;
    // T = 3 fits block pursuit (k = 2 <= T) but not the pursuit union (2k > T).
    cfg.sweep.t_pilots = vec![3, 8];
    cfg.solvers.list = vec![
        mmv_harness::SolverKind::Somp,
        mmv_harness::SolverKind::Sp,
        mmv_harness::SolverKind::Alg2,
    ];
    cfg.data.networks = vec![NetKind::Rnn];
    let report = commands::gen_data(&cfg, false).unwrap();
    assert_eq!(report.files.len(), 1);
    assert_eq!(report.skipped.len(), 1);
    commands::train(
        &cfg,
        NetKind::Rnn,
        &commands::dataset_path(&cfg, NetKind::Rnn, 8),
        None,
    )
    .unwrap();
    let run = commands::run(&cfg).unwrap();
    let at3: Vec<&ResultRow> = run.rows.iter().filter(|r| r.sweep_value == 3.0).collect();
    assert!(at3
        .iter()
        .find(|r| r.solver == "somp")
        .unwrap()
        .error
        .is_none());
    assert!(at3
        .iter()
        .filter(|r| r.solver != "somp")
        .all(|r| r.error.is_some() && r.nmse.is_none()));
    assert!(run
        .rows
        .iter()
        .filter(|r| r.sweep_value == 8.0)
        .all(|r| r.error.is_none()));
}

#[test]
fn default_counts_and_equal_parts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.out_dir = dir.path().to_path_buf();
    let report = commands::gen_data(&cfg, false).unwrap();
    assert_eq!(report.files.len(), 2);
    let mlp =
        mmv_core::data_gen::load_dataset(&commands::dataset_path(&cfg, NetKind::Mlp, 72)).unwrap();
    assert_eq!(mlp.len(), 15000);
    assert_eq!(
        (mlp.meta().m, mlp.meta().n, mlp.meta().num_vectors),
        (144, 288, 4)
    );
    let rnn =
        mmv_core::data_gen::load_dataset(&commands::dataset_path(&cfg, NetKind::Rnn, 72)).unwrap();
    assert_eq!(rnn.len(), 12000);
    let mmv_core::data_gen::Dataset::Residual(set) = rnn else {
        panic!("rnn dataset holds sequences")
    };
    assert_eq!(set.part_counts(), vec![12000; 4]);
}
