use std::process::Command;

fn sgir(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sgir")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sgir-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn spectrum_then_sgir_schedule() {
    let dir = scratch("spectrum");
    let prof = dir.join("profile.csv");
    let out = sgir(&["spectrum", "--problem", "grover", "--n", "5", "--p", "6", "--out", prof.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&prof).unwrap();
    assert!(text.starts_with("# n=5,") && text.lines().count() == 9);
    let out = sgir(&["schedule", "--family", "sgir", "--depth", "6", "--profile", prof.to_str().unwrap()]);
    assert!(out.status.success());
    let sched = String::from_utf8(out.stdout).unwrap();
    assert!(sched.starts_with("# family=sgir,p=6"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn run_reports_metadata() {
    let out = sgir(&["run", "--problem", "mis", "--n", "6", "--depth", "3", "--shots", "200", "--seed", "4"]);
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(meta["shots"], 200);
    assert_eq!(meta["seed"], 4);
}

#[test]
fn failures_emit_error_record() {
    let out = sgir(&["grid-search", "--problem", "mis", "--n", "5"]);
    assert!(!out.status.success());
    let rec: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(rec["error"], "parameter");
    let out = sgir(&["schedule", "--family", "sgir"]);
    assert!(!out.status.success());
}

#[test]
fn experiment_fit_plot_pipeline() {
    let dir = scratch("pipeline");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind":"grover-scaling","n_values":[3,4,5,6],"p":4,"instances":2,"shots":500,
            "families":["lr","sgir"],"grid":{"log_beta_range":[-1.5,0.5],"log_gamma_range":[-1,1],"points_per_axis":3}}"#,
    )
    .unwrap();
    let res = dir.join("out");
    let out = sgir(&["experiment", cfg.to_str().unwrap(), "--output", res.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = res.join("results.csv");
    assert!(res.join("manifest.json").exists());
    let out = sgir(&["fit", csv.to_str().unwrap()]);
    let fits: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(fits.as_array().unwrap().len(), 2);
    assert!(fits[0]["slope"].as_f64().unwrap() < 0.0);
    let svg = dir.join("plot.svg");
    let out = sgir(&["plot", csv.to_str().unwrap(), "--kind", "scaling", "--out", svg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn depth_scaling_reports_trace() {
    let out = sgir(&[
        "depth-scaling", "--problem", "grover", "--n", "4", "--threshold", "0.5", "--instances", "2", "--points", "3",
        "--shots", "500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rec["p_required"].as_u64().is_some());
}
