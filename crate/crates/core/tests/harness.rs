use sgir::harness::{
    improvement_vs_gap, plot_rows, rows_from_csv, run_experiment, scaling_fit, ExperimentConfig, ExperimentKind,
    PlotKind,
};
use sgir::search::GridSpec;
use sgir::simulator::{NoiseConfig, NoiseMode};
use sgir::ScheduleFamily;

fn coarse() -> GridSpec {
    GridSpec { points_per_axis: 3, ..GridSpec::default() }
}

#[test]
fn grover_scaling_row_cardinality() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::GroverScaling,
        n_values: (3..=12).collect(),
        p: 10,
        families: vec![ScheduleFamily::Lr, ScheduleFamily::Sgir, ScheduleFamily::Rc, ScheduleFamily::Random],
        instances: 10,
        grid: GridSpec { points_per_axis: 1, ..GridSpec::default() },
        shots: 100,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 400);
    assert!(out.rows.iter().all(|r| r.error.is_none()));
    assert!(out.rows.iter().all(|r| r.g_min.is_some() && !r.problem_hash.is_empty()));
}

#[test]
fn rerun_is_byte_identical_and_csv_round_trips() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::MisScaling,
        n_values: vec![6, 8],
        instances: 2,
        p: 4,
        grid: coarse(),
        shots: 500,
        master_seed: 11,
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.csv(), b.csv());
    assert_eq!(rows_from_csv(&a.csv()).unwrap(), a.rows);
    let other = run_experiment(&ExperimentConfig { master_seed: 12, ..cfg.clone() }).unwrap();
    assert_ne!(a.csv(), other.csv());
}

#[test]
fn adding_a_family_keeps_other_cells() {
    let base = ExperimentConfig {
        kind: ExperimentKind::GroverScaling,
        n_values: vec![4, 5],
        instances: 2,
        p: 3,
        grid: coarse(),
        shots: 300,
        families: vec![ScheduleFamily::Lr],
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&base).unwrap();
    let b = run_experiment(&ExperimentConfig { families: vec![ScheduleFamily::Lr, ScheduleFamily::Random], ..base })
        .unwrap();
    let lr: Vec<_> = b.rows.into_iter().filter(|r| r.family == ScheduleFamily::Lr).collect();
    assert_eq!(a.rows, lr);
}

#[test]
fn failing_cell_is_recorded_and_sweep_continues() {
    // No 3-regular graph on 7 nodes.
    let cfg = ExperimentConfig {
        kind: ExperimentKind::MisScaling,
        n_values: vec![6, 7, 8],
        instances: 1,
        p: 3,
        grid: coarse(),
        shots: 200,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 6);
    for r in &out.rows {
        assert_eq!(r.error.is_some(), r.n == 7, "{r:?}");
    }
    assert!(out.rows.iter().find(|r| r.n == 7).unwrap().error.as_ref().unwrap().starts_with("parameter"));
}

#[test]
fn invalid_configs_rejected() {
    let empty = ExperimentConfig { n_values: vec![], ..ExperimentConfig::default() };
    assert!(run_experiment(&empty).is_err());
    let rc_mis = ExperimentConfig {
        kind: ExperimentKind::MisScaling,
        families: vec![ScheduleFamily::Rc],
        ..ExperimentConfig::default()
    };
    assert!(rc_mis.validate().is_err());
    let noise_missing = ExperimentConfig { kind: ExperimentKind::MisNoise, ..ExperimentConfig::default() };
    assert!(noise_missing.validate().is_err());
    let bad_target = ExperimentConfig {
        kind: ExperimentKind::LargeNExtrapolated,
        n_values: vec![12],
        ..ExperimentConfig::default()
    };
    assert!(bad_target.validate().is_err());
    assert!(ExperimentConfig::from_json(r#"{"kind":"mis-scaling","bogus":1}"#).is_err());
}

#[test]
fn json_config_defaults_and_overrides() {
    let cfg = ExperimentConfig::from_json(
        r#"{"kind":"mis-noise","n_values":[6],"noise":{"p_noise":0.001,"mode":"trajectories","n_traj":20},
            "grid":{"log_beta_range":[-1.5,0.5],"log_gamma_range":[-1,1],"points_per_axis":20}}"#,
    )
    .unwrap();
    assert_eq!(cfg.kind, ExperimentKind::MisNoise);
    assert_eq!(cfg.grid.points_per_axis, 20);
    assert_eq!(cfg.instances, 10);
    assert_eq!(cfg.noise.unwrap().n_traj, 20);
}

#[test]
fn depth_scan_writes_trace() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::GroverDepth,
        n_values: vec![4],
        instances: 2,
        grid: coarse(),
        shots: 500,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 2);
    for r in &out.rows {
        let d = r.depth_required.expect("n=4 reaches 0.1 quickly");
        let t = out.traces.iter().find(|t| t.family == r.family).unwrap();
        assert_eq!(t.trace.last().unwrap().0, d);
    }
    assert_eq!(plot_rows(&out.rows, PlotKind::Depth).unwrap().matches("<polyline").count(), 2);
}

#[test]
fn mis_noise_cells_fill_noisy_columns() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::MisNoise,
        n_values: vec![6],
        p_values: vec![2, 4],
        instances: 1,
        lambda: 100.0,
        grid: coarse(),
        shots: 200,
        noise: Some(NoiseConfig { p_noise: 0.01, mode: NoiseMode::Trajectories, n_traj: 50 }),
        noise_screen_top: 2,
        noise_screen_traj: 10,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 4);
    for r in &out.rows {
        assert!(r.error.is_none(), "{r:?}");
        let (v, se) = (r.p_s_noisy.unwrap(), r.p_s_noisy_stderr.unwrap());
        assert!((0.0..=1.0).contains(&v) && se >= 0.0);
        assert!(r.beta_start.is_some() && r.gamma_end.is_some());
    }
    assert!(plot_rows(&out.rows, PlotKind::Noise).unwrap().contains("lr noisy"));
}

#[test]
fn extrapolated_kind_and_outputs_on_disk() {
    let dir = std::env::temp_dir().join(format!("sgir-harness-{}", std::process::id()));
    let cfg = ExperimentConfig {
        kind: ExperimentKind::LargeNExtrapolated,
        n_values: vec![10],
        calibration_n: vec![6, 8],
        instances: 2,
        p: 4,
        grid: coarse(),
        shots: 200,
        output: Some(dir.clone()),
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 4);
    let sgir = out.rows.iter().find(|r| r.family == ScheduleFamily::Sgir).unwrap();
    assert!(sgir.error.is_none(), "{sgir:?}");
    assert_eq!(sgir.shape, "extrapolated-degree3");
    assert_eq!(out.profiles.len(), 1);
    assert_eq!(out.profiles[0].gaps[0], 4.0);
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert_eq!(csv, out.csv());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rows"], 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fits_and_correlation_helpers() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::GroverScaling,
        n_values: vec![3, 4, 5, 6],
        instances: 2,
        p: 4,
        grid: coarse(),
        shots: 2000,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&cfg).unwrap();
    let fit = scaling_fit(&out.rows, ScheduleFamily::Lr, true).unwrap();
    assert!(fit.slope < 0.0 && fit.slope_err >= 0.0);
    assert_eq!(improvement_vs_gap(&out.rows, true).len(), 8);
    let svg = plot_rows(&out.rows, PlotKind::Scaling).unwrap();
    assert_eq!(svg.matches(r#"class="fit""#).count(), 2);
    assert!(plot_rows(&out.rows, PlotKind::Correlation).unwrap().contains("<circle"));
}
