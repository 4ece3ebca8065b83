//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynacred"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).expect("write config");
}

const CASE_2A: &str = r#"
[model]
variant = "DYNAMIC_AR1"
sigma2 = 0.5
rho = 0.6
lambdas = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
"#;

#[test]
fn factors_reproduces_case_2a() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.toml");
    write(&config, CASE_2A);
    let json_path = dir.path().join("factors.json");
    let out = run(&[
        "factors",
        "--config",
        config.to_str().unwrap(),
        "--json-out",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("6.172 13.578 31.847 75.594 179.815"),
        "stdout: {}",
        text
    );
    assert!(text.contains("isotonic: yes"));
    assert!(text.contains("regular: yes"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let alpha = json["alpha"].as_array().unwrap();
    assert_eq!(alpha.len(), 5);
    assert!((alpha[4].as_f64().unwrap() - 0.179815336).abs() < 1e-9);
    assert_eq!(json["isotonic"], serde_json::Value::Bool(true));
}

#[test]
fn factors_with_zero_rho_is_all_zero_and_isotonic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.toml");
    write(
        &config,
        r#"
[model]
variant = "DYNAMIC_AR1"
sigma2 = 0.5
rho = 0.0
lambdas = [1.0, 1.0, 1.0, 1.0]
"#,
    );
    let out = run(&["factors", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("alpha_star (x1e-3): 0.000 0.000 0.000"), "stdout: {}", text);
    assert!(text.contains("isotonic: yes"));
}

#[test]
fn factors_arma_remark_is_not_regular() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.toml");
    write(
        &config,
        r#"
[model]
variant = "ARMA11"
phi = 0.5
theta = -0.2
sigma_e_sq = 1.0
lambdas = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
"#,
    );
    let out = run(&["factors", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("regular: no"));
}

#[test]
fn factors_rejects_invalid_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.toml");
    write(
        &config,
        r#"
[model]
variant = "DYNAMIC_AR1"
sigma2 = 0.5
rho = 1.5
lambdas = [1.0, 1.0, 1.0]
"#,
    );
    let out = run(&["factors", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("correlation"), "stderr: {}", stderr(&out));
}

#[test]
fn tables_emit_the_published_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tables");
    for id in [
        "two-component",
        "poisson-std",
        "poisson-nonstd",
        "gamma-both",
        "semiparametric",
        "arma-remark",
    ] {
        let out = run(&["tables", "--id", id, "--out-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "table {}: {}", id, stderr(&out));
    }
    let poisson = fs::read_to_string(out_dir.join("poisson-std.csv")).unwrap();
    assert!(poisson.contains("2.a,0.6,1;1;1;1;1,6.172,13.578,31.847,75.594,179.815"));
    assert!(poisson.contains("1.a,0.3,1;1;1;1;1,0.167,0.809,3.999,19.785,97.894"));
    let nonstd = fs::read_to_string(out_dir.join("poisson-nonstd.csv")).unwrap();
    assert!(nonstd.contains("2.c,0.6,10;1;0.1;0.01;0.001,4.586,32.102,85.300,165.793,291.383"));
    let gamma = fs::read_to_string(out_dir.join("gamma-both.csv")).unwrap();
    assert!(gamma.contains("1.a,alpha,0.3,1;1;1;1;1,0.134,0.716,3.916,21.429,117.279"));
    assert!(gamma.contains("2.b,alpha_star,0.3,0.001;0.01;0.1;1;10,0.000,0.001,0.004,0.021,0.117"));
    let semi = fs::read_to_string(out_dir.join("semiparametric.csv")).unwrap();
    assert!(semi.contains("5,0.27,0.09,0.10,0.09,0.05"));
    let two = fs::read_to_string(out_dir.join("two-component.csv")).unwrap();
    assert!(two.contains("I,0.01,1,0.046,0.011,0.011,0.042,0.805,no"));
    let arma = fs::read_to_string(out_dir.join("arma-remark.csv")).unwrap();
    assert!(arma.contains("0.001,-0.006,0.028,-0.140,0.700,no"));
}

#[test]
fn tables_reject_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["tables", "--id", "nope", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).to_lowercase().contains("unknown table"));
}

const SIM_CONFIG: &str = r#"
n_policies = 30
t = 5
seed = 5
beta = [-3.0, 2.0]

[covariates]
mean = 0.0
variance = 0.6

[state]
family = "BGAR1"
sigma2 = 1.0
rho = 0.6
"#;

#[test]
fn simulate_single_policy_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.toml");
    write(
        &config,
        r#"
n_policies = 1
t = 2
seed = 1
beta = [0.0]

[state]
family = "IID"
sigma2 = 0.5
"#,
    );
    let panel = dir.path().join("panel.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        panel.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&panel).unwrap();
    assert_eq!(text.lines().count(), 1 + 3, "header plus three periods");
    assert!(text.starts_with("policy_id,period,lambda,y,true_r"));
}

#[test]
fn simulate_is_reproducible_and_seed_flag_wins_over_env() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.toml");
    write(&config, SIM_CONFIG);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");

    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "same config+seed, same bytes");

    // The env var overrides the config seed; the flag overrides the env var.
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap(), "--out", c.to_str().unwrap()])
        .env("DYNACRED_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap(), "env seed changes the panel");

    let out = bin()
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            c.to_str().unwrap(),
            "--seed",
            "5",
        ])
        .env("DYNACRED_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap(), "flag beats env");
}

fn simulate_panel_file(dir: &Path) -> std::path::PathBuf {
    let config = dir.join("sim.toml");
    write(&config, SIM_CONFIG);
    let panel = dir.join("panel.csv");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        panel.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    panel
}

#[test]
fn evaluate_true_only_scores_one_hundred() {
    let dir = tempfile::tempdir().unwrap();
    let panel = simulate_panel_file(dir.path());
    let config = dir.path().join("eval.toml");
    write(
        &config,
        r#"
methods = ["TRUE"]
n_copies = 20
seed = 3
"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--panel",
        panel.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let summary = json["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 1);
    assert!((summary[0]["relative_rmse_pct"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!((summary[0]["relative_mae_pct"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    let premiums = fs::read_to_string(out_dir.join("premiums.csv")).unwrap();
    assert!(premiums.starts_with("policy_id,method,predicted"));
    assert_eq!(premiums.lines().count(), 1 + 30);
}

#[test]
fn evaluate_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let panel = simulate_panel_file(dir.path());
    let config = dir.path().join("eval.toml");
    write(
        &config,
        r#"
methods = ["NAIVE", "STATIC", "PROPOSED", "TRUE"]
n_copies = 10
seed = 3
"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "evaluate",
            "--config",
            config.to_str().unwrap(),
            "--panel",
            panel.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    assert_eq!(
        fs::read(out_a.join("premiums.csv")).unwrap(),
        fs::read(out_b.join("premiums.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("summary.json")).unwrap(),
        fs::read(out_b.join("summary.json")).unwrap()
    );
}

#[test]
fn fit_recovers_coefficients_and_moments() {
    let dir = tempfile::tempdir().unwrap();
    let panel = simulate_panel_file(dir.path());
    let config = dir.path().join("fit.toml");
    write(&config, "drop_last_period = true\n");
    let json_path = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--config",
        config.to_str().unwrap(),
        "--panel",
        panel.to_str().unwrap(),
        "--json-out",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("intercept"), "stdout: {}", text);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let beta = json["beta"].as_array().unwrap();
    assert_eq!(beta.len(), 2);
    // 30 small policies: loose recovery only.
    assert!((beta[0].as_f64().unwrap() + 3.0).abs() < 1.5);
    assert!((beta[1].as_f64().unwrap() - 2.0).abs() < 1.5);
    assert!(json["sigma2_hat"].is_number());
    assert_eq!(json["converged"], serde_json::Value::Bool(true));
}

#[test]
fn fit_surfaces_degenerate_panels() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    write(
        &panel,
        "policy_id,period,lambda,y,true_r\nP1,1,1.0,2.0,\nP2,1,1.0,0.0,\n",
    );
    let config = dir.path().join("fit.toml");
    write(&config, "");
    let out = run(&[
        "fit",
        "--config",
        config.to_str().unwrap(),
        "--panel",
        panel.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).to_lowercase().contains("consecutive"),
        "stderr: {}",
        stderr(&out)
    );
}
